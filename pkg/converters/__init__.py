# Output Format Converters Package
from .output_converter import OutputConverter

__all__ = ['OutputConverter']
