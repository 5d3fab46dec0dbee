"""
Test suite for the detection-and-decoding bounds toolkit.
""" 