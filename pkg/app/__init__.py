"""
Spurious Network Lab
Simulasi random field pada sphere, konstruksi network, dan deteksi fitur spurious
"""

__version__ = "1.0.0"
