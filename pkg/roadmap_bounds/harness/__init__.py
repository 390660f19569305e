"""Seeded Monte Carlo experiments and verification oracles"""
