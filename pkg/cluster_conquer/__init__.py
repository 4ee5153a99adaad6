"""Correlation-based clustering and conquer for parallel ranking and selection"""
