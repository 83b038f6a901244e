"""Checker, machines, stores, macros and corpus services"""
