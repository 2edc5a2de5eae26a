"""EasInnova - business process innovation projects as checkable artifact sets"""

__version__ = "1.0.0"
