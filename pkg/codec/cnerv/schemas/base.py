from pydantic import BaseModel, Extra


class StrictModel(BaseModel):
    """Configuration document: unknown keys are rejected."""

    class Config:
        extra = Extra.forbid
        validate_assignment = True
