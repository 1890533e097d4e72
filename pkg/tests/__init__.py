"""
Tests for the subweibull package
"""
