"""Probabilistic roadmap construction and queries"""
