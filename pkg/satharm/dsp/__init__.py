# File: satharm/dsp/__init__.py
