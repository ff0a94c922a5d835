"""Laboratory utilities."""

from .json_processor import JSONProcessor
from .uuid_utils import generate_run_uuid

__all__ = ['generate_run_uuid', 'JSONProcessor']
