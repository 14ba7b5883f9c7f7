"""Document parsing pipeline, structured-output metrics and rewards, MTP decoding simulator."""

__version__ = "0.1.0"
