"""Coverage of IRIS (CRIS) publication records in OpenCitations Meta and Index dumps."""

__version__ = "0.1.0"
