"""Syntax, classification, parsing and printing"""
