"""Element data: standard atomic weights, isotope masses and default valences.

Weights are IUPAC 2021 standard (abridged/conventional) values rounded to
three decimals. Elements without a stable isotope use the mass number of the
longest-lived isotope.
"""

HYDROGEN_MASS = 1.008

ATOMIC_WEIGHTS = {
    "H": 1.008, "He": 4.003, "Li": 6.94, "Be": 9.012, "B": 10.81,
    "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.998, "Ne": 20.180,
    "Na": 22.990, "Mg": 24.305, "Al": 26.982, "Si": 28.085, "P": 30.974,
    "S": 32.06, "Cl": 35.45, "Ar": 39.95, "K": 39.098, "Ca": 40.078,
    "Sc": 44.956, "Ti": 47.867, "V": 50.942, "Cr": 51.996, "Mn": 54.938,
    "Fe": 55.845, "Co": 58.933, "Ni": 58.693, "Cu": 63.546, "Zn": 65.38,
    "Ga": 69.723, "Ge": 72.630, "As": 74.922, "Se": 78.971, "Br": 79.904,
    "Kr": 83.798, "Rb": 85.468, "Sr": 87.62, "Y": 88.906, "Zr": 91.224,
    "Nb": 92.906, "Mo": 95.95, "Tc": 98.0, "Ru": 101.07, "Rh": 102.906,
    "Pd": 106.42, "Ag": 107.868, "Cd": 112.414, "In": 114.818, "Sn": 118.710,
    "Sb": 121.760, "Te": 127.60, "I": 126.904, "Xe": 131.293, "Cs": 132.905,
    "Ba": 137.327, "La": 138.905, "Ce": 140.116, "Pr": 140.908, "Nd": 144.242,
    "Pm": 145.0, "Sm": 150.36, "Eu": 151.964, "Gd": 157.25, "Tb": 158.925,
    "Dy": 162.500, "Ho": 164.930, "Er": 167.259, "Tm": 168.934, "Yb": 173.045,
    "Lu": 174.967, "Hf": 178.486, "Ta": 180.948, "W": 183.84, "Re": 186.207,
    "Os": 190.23, "Ir": 192.217, "Pt": 195.084, "Au": 196.967, "Hg": 200.592,
    "Tl": 204.38, "Pb": 207.2, "Bi": 208.980, "Po": 209.0, "At": 210.0,
    "Rn": 222.0, "Fr": 223.0, "Ra": 226.0, "Ac": 227.0, "Th": 232.038,
    "Pa": 231.036, "U": 238.029, "Np": 237.0, "Pu": 244.0, "Am": 243.0,
    "Cm": 247.0, "Bk": 247.0, "Cf": 251.0, "Es": 252.0, "Fm": 257.0,
    "Md": 258.0, "No": 259.0, "Lr": 262.0, "Rf": 267.0, "Db": 268.0,
    "Sg": 269.0, "Bh": 270.0, "Hs": 269.0, "Mt": 278.0, "Ds": 281.0,
    "Rg": 282.0, "Cn": 285.0, "Nh": 286.0, "Fl": 289.0, "Mc": 290.0,
    "Lv": 293.0, "Ts": 294.0, "Og": 294.0,
}

# (element, mass number) -> exact isotopic mass; unknown isotopes fall back to
# the mass number itself.
ISOTOPE_MASSES = {
    ("H", 1): 1.008, ("H", 2): 2.014, ("H", 3): 3.016,
    ("B", 10): 10.013, ("B", 11): 11.009,
    ("C", 11): 11.011, ("C", 12): 12.000, ("C", 13): 13.003, ("C", 14): 14.003,
    ("N", 13): 13.006, ("N", 14): 14.003, ("N", 15): 15.000,
    ("O", 15): 15.003, ("O", 16): 15.995, ("O", 17): 16.999, ("O", 18): 17.999,
    ("F", 18): 18.001, ("F", 19): 18.998,
    ("P", 31): 30.974, ("P", 32): 31.974,
    ("S", 32): 31.972, ("S", 33): 32.971, ("S", 34): 33.968, ("S", 35): 34.969,
    ("Cl", 35): 34.969, ("Cl", 36): 35.968, ("Cl", 37): 36.966,
    ("Br", 76): 75.924, ("Br", 79): 78.918, ("Br", 81): 80.916,
    ("I", 123): 122.906, ("I", 124): 123.906, ("I", 125): 124.905,
    ("I", 127): 126.904, ("I", 131): 130.906,
    ("Tc", 99): 98.906,
}

ORGANIC_SUBSET = ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I")

# lowercase symbols allowed as aromatic atoms (bare or in brackets)
AROMATIC_SYMBOLS = {
    "b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S",
    "se": "Se", "as": "As", "te": "Te",
}

# allowed valences for unbracketed atoms; the smallest one that fits is used
DEFAULT_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}

HALOGENS = frozenset({"F", "Cl", "Br", "I"})


def atomic_mass(element, isotope=None):
    if isotope is not None:
        return ISOTOPE_MASSES.get((element, isotope), float(isotope))
    return ATOMIC_WEIGHTS[element]


def is_element(symbol):
    return symbol in ATOMIC_WEIGHTS
