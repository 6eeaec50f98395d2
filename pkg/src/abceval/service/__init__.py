from .api import ApiError, ApiSession, create_app
from .cli import main

__all__ = ["ApiError", "ApiSession", "create_app", "main"]
