"""Sample scheduling across sequences of motion-planning subproblems"""
