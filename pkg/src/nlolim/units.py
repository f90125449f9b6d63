"""Atomic-unit constants (hbar = m_e = e = 1)."""

#: speed of light in atomic units (CODATA 2018)
C_AU = 137.035999084
#: fine-structure constant
ALPHA_FS = 1.0 / C_AU
HBAR = 1.0
M_E = 1.0
E_CHARGE = 1.0

SCHEMA = "nlolim/1"
