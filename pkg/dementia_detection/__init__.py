"""Multimodal (audio, text, timestamps) dementia detection from picture-description transcripts."""
__version__ = "0.1"
