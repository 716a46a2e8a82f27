"""Unit conventions.

Frequencies and rates are energies in eV (a rate ``k`` means ``k / hbar``).
Time is measured internally in hbar/eV, about 0.658 fs.
"""

HBAR_EV_FS = 0.658211951


def fs_to_internal(t_fs):
    return t_fs / HBAR_EV_FS


def internal_to_fs(t):
    return t * HBAR_EV_FS
