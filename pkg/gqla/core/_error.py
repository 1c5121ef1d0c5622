"""Error routines for gqla."""

from typing import Literal

ErrorCategory = Literal["config", "format", "system"]


class GqlaError(Exception):
    """Error in gqla execution."""

    category: ErrorCategory
    message: str

    def __init__(self, category: ErrorCategory, message: str):
        """Create an instance of GqlaError with category and message."""
        self.category = category
        self.message = message
        super().__init__(message)
