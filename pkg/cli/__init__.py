"""CLI package for HiddenShift"""
