"""Offline landmark extraction into gesturekit replay files."""

from .backends import Extractor, HandDetection, MediaPipeExtractor, SyntheticExtractor, create_extractor
from .extract import (
    ExtractionJob,
    ExtractionReport,
    derotate_landmarks,
    extract_sample,
    parse_setting_arg,
    run_extraction,
)

__version__ = "0.1.0"
