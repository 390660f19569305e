"""Sample-count and connection-radius bounds"""
