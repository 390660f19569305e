"""Collision-free configuration spaces built from axis-aligned boxes"""
