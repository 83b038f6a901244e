"""Syntax trees and formulas"""
