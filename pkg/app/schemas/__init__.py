"""Pydantic report schemas for checker, machine and CLI output"""
