from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic.alias_generators import to_camel


class ConfiguredModel(BaseModel):
    """
    Base of the run configs and reports.

    Fields read camelCase keys from JSON payloads as well as snake_case
    keywords, and a model validates directly from another model's attributes.
    """
    model_config = ConfigDict(
        populate_by_name=True,
        alias_generator=to_camel,
        from_attributes=True,
    )


class FrozenModel(ConfiguredModel):
    """Immutable value object that may carry numpy arrays."""
    model_config = ConfigDict(
        populate_by_name=True,
        alias_generator=to_camel,
        from_attributes=True,
        frozen=True,
        arbitrary_types_allowed=True,
    )


def readonly(array: Any, dtype: Any = None) -> np.ndarray:
    """Copies ``array`` into a contiguous numpy array that refuses writes."""
    result = np.array(array, dtype=dtype, copy=True)
    result.flags.writeable = False
    return result

