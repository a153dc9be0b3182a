"""Rigidity of bar-and-joint frameworks in Euclidean, l_p and polyhedral normed spaces."""
from .analysis import AnalysisConfig, AnalysisReport, analyze
from .model import Framework, load_framework, parse_framework, serialize_framework, serialize_report
from .norms import NormSpec

__version__ = "0.1.0"
