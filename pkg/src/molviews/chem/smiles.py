"""SMILES parser (no stereochemistry semantics).

Supported: organic-subset atoms, aromatic lowercase atoms, bracket atoms with
isotope / charge / hydrogen count / atom class, bonds ``- = # :``, branches,
ring closures (``1``-``9`` and ``%nn``) and ``.`` fragment separators.
Stereo markers ``/ \\ @ @@`` are accepted and dropped.
"""

from __future__ import annotations

from molviews.chem.elements import AROMATIC_SYMBOLS, ORGANIC_SUBSET, is_element
from molviews.chem.molecule import AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Bond, Molecule


class SmilesError(ValueError):
    """Base class for SMILES parse errors; ``offset`` is a byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class EmptyInput(SmilesError):
    pass


class UnbalancedBranch(SmilesError):
    pass


class UnclosedRingBond(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class MalformedBracketAtom(SmilesError):
    pass


class SmilesSyntaxError(SmilesError):
    """Any other structural problem (stray bond symbol, duplicate bond, ...)."""


_BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC, "/": SINGLE, "\\": SINGLE}


class _RawAtom:
    __slots__ = ("element", "aromatic", "charge", "isotope", "hcount")

    def __init__(self, element, aromatic, charge=0, isotope=None, hcount=None):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.isotope = isotope
        self.hcount = hcount


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.atoms: list[_RawAtom] = []
        # (i, j) -> (order or None if implicit)
        self.bonds: dict[tuple[int, int], object] = {}
        self.bond_list: list[tuple[int, int]] = []

    def error(self, cls, message, index=None):
        idx = self.pos if index is None else index
        return cls(message, _byte_offset(self.text, idx))

    def parse(self):
        text = self.text
        prev = None
        pending_bond = None  # (order, index)
        branches: list[tuple[int, int]] = []  # (atom, index of '(')
        rings: dict[int, tuple[int, object, int]] = {}  # digit -> (atom, order, index)

        while self.pos < len(text):
            ch = text[self.pos]
            start = self.pos
            if ch == "(":
                if prev is None:
                    raise self.error(SmilesSyntaxError, "branch opened before any atom")
                if pending_bond is not None:
                    raise self.error(SmilesSyntaxError, "bond symbol before branch")
                branches.append((prev, start))
                self.pos += 1
            elif ch == ")":
                if not branches:
                    raise self.error(UnbalancedBranch, "unmatched ')'")
                if pending_bond is not None:
                    raise self.error(SmilesSyntaxError, "dangling bond symbol before ')'")
                prev, _ = branches.pop()
                self.pos += 1
            elif ch in _BOND_SYMBOLS:
                if prev is None or pending_bond is not None:
                    raise self.error(SmilesSyntaxError, f"unexpected bond symbol {ch!r}")
                pending_bond = (_BOND_SYMBOLS[ch], start)
                self.pos += 1
            elif ch == "$":
                raise self.error(SmilesSyntaxError, "quadruple bonds are not supported")
            elif ch == ".":
                if pending_bond is not None or prev is None:
                    raise self.error(SmilesSyntaxError, "unexpected '.'")
                prev = None
                self.pos += 1
            elif ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.error(SmilesSyntaxError, "ring-closure digit before any atom")
                if ch == "%":
                    digits = text[self.pos + 1:self.pos + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        raise self.error(SmilesSyntaxError, "'%' must be followed by two digits")
                    num = int(digits)
                    self.pos += 3
                else:
                    num = int(ch)
                    self.pos += 1
                order = pending_bond[0] if pending_bond else None
                pending_bond = None
                if num in rings:
                    other, other_order, _ = rings.pop(num)
                    if order is not None and other_order is not None and order != other_order:
                        raise self.error(SmilesSyntaxError, f"conflicting bond orders on ring {num}", start)
                    self._add_bond(other, prev, order if order is not None else other_order, start)
                else:
                    rings[num] = (prev, order, start)
            elif ch == "[":
                atom = self._bracket_atom()
                prev = self._attach(atom, prev, pending_bond, start)
                pending_bond = None
            elif ch.isspace():
                raise self.error(SmilesSyntaxError, "whitespace inside SMILES")
            else:
                atom = self._organic_atom()
                prev = self._attach(atom, prev, pending_bond, start)
                pending_bond = None

        if pending_bond is not None:
            raise self.error(SmilesSyntaxError, "dangling bond at end of input", pending_bond[1])
        if branches:
            raise self.error(UnbalancedBranch, "unclosed '('", branches[-1][1])
        if rings:
            first = min(rings.values(), key=lambda r: r[2])
            raise self.error(UnclosedRingBond, "ring bond never closed", first[2])

    def _attach(self, atom, prev, pending_bond, index):
        self.atoms.append(atom)
        idx = len(self.atoms) - 1
        if prev is not None:
            order = pending_bond[0] if pending_bond else None
            self._add_bond(prev, idx, order, index)
        return idx

    def _add_bond(self, i, j, order, index):
        if i == j:
            raise self.error(SmilesSyntaxError, "ring closure onto the same atom", index)
        key = (min(i, j), max(i, j))
        if key in self.bonds:
            raise self.error(SmilesSyntaxError, "duplicate bond", index)
        self.bonds[key] = order
        self.bond_list.append((i, j))

    def _organic_atom(self):
        text = self.text
        two = text[self.pos:self.pos + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return _RawAtom(two, False)
        ch = text[self.pos]
        if ch in ORGANIC_SUBSET:
            self.pos += 1
            return _RawAtom(ch, False)
        if ch in ("b", "c", "n", "o", "p", "s"):
            self.pos += 1
            return _RawAtom(AROMATIC_SYMBOLS[ch], True)
        raise self.error(UnknownElement, f"unknown atom symbol {ch!r}")

    def _bracket_atom(self):
        text = self.text
        open_idx = self.pos
        close = text.find("]", open_idx)
        if close < 0:
            raise self.error(MalformedBracketAtom, "unterminated bracket atom", open_idx)
        body = text[open_idx + 1:close]
        i = 0

        def fail(msg):
            return self.error(MalformedBracketAtom, msg, open_idx + 1 + i)

        isotope = None
        j = i
        while j < len(body) and body[j].isdigit():
            j += 1
        if j > i:
            isotope = int(body[i:j])
            i = j

        if i >= len(body):
            raise fail("bracket atom without element symbol")
        element = aromatic = None
        for size in (2, 1):
            sym = body[i:i + size]
            if len(sym) < size:
                continue
            if sym in AROMATIC_SYMBOLS:
                element, aromatic = AROMATIC_SYMBOLS[sym], True
            elif sym[0].isupper() and is_element(sym):
                element, aromatic = sym, False
            if element is not None:
                i += size
                break
        if element is None:
            if body[i].isalpha() or body[i] == "*":
                sym = body[i:i + 2] if body[i + 1:i + 2].islower() else body[i]
                raise self.error(UnknownElement, f"unknown element {sym!r}", open_idx + 1 + i)
            raise fail("bracket atom without element symbol")

        # chirality: @, @@, @TH1, @AL2, @SP3, @TB12, @OH30
        if i < len(body) and body[i] == "@":
            i += 1
            if i < len(body) and body[i] == "@":
                i += 1
            elif body[i:i + 2] in ("TH", "AL", "SP", "TB", "OH"):
                i += 2
                while i < len(body) and body[i].isdigit():
                    i += 1

        hcount = 0
        if i < len(body) and body[i] == "H":
            i += 1
            j = i
            while j < len(body) and body[j].isdigit():
                j += 1
            hcount = int(body[i:j]) if j > i else 1
            i = j

        charge = 0
        if i < len(body) and body[i] in "+-":
            sign = 1 if body[i] == "+" else -1
            sym = body[i]
            i += 1
            if i < len(body) and body[i].isdigit():
                j = i
                while j < len(body) and body[j].isdigit():
                    j += 1
                charge = sign * int(body[i:j])
                i = j
            else:
                charge = sign
                while i < len(body) and body[i] == sym:
                    charge += sign
                    i += 1

        if i < len(body) and body[i] == ":":
            j = i + 1
            while j < len(body) and body[j].isdigit():
                j += 1
            if j == i + 1:
                raise fail("atom class without number")
            i = j

        if i != len(body):
            raise fail(f"unexpected {body[i]!r} in bracket atom")
        self.pos = close + 1
        return _RawAtom(element, aromatic, charge, isotope, hcount)


def parse_graph(text: str) -> Molecule:
    """Parse SMILES into a bare graph: no ring fix-ups, no hydrogens.

    Implicit bonds between two aromatic atoms are aromatic, otherwise single.
    """
    if text is None or not text.strip():
        raise EmptyInput("empty SMILES", 0)
    lead = len(text) - len(text.lstrip())
    body = text.strip()
    parser = _Parser(body)
    try:
        parser.parse()
    except SmilesError as exc:
        exc.offset += lead
        exc.args = (f"{exc.args[0].rsplit(' (byte', 1)[0]} (byte {exc.offset})",)
        raise
    atoms = tuple(
        Atom(
            element=a.element,
            aromatic=a.aromatic,
            formal_charge=a.charge,
            isotope=a.isotope,
            explicit_h=a.hcount,
            implicit_h=a.hcount or 0,
        )
        for a in parser.atoms
    )
    bonds = []
    for i, j in parser.bond_list:
        order = parser.bonds[(min(i, j), max(i, j))]
        if order is None:
            order = AROMATIC if atoms[i].aromatic and atoms[j].aromatic else SINGLE
        bonds.append(Bond(i, j, order))
    return Molecule(atoms, tuple(bonds), body)


def parse_smiles(text: str) -> Molecule:
    """Parse SMILES and run ring, hydrogen and aromaticity perception."""
    from molviews.chem.perception import finalize

    return finalize(parse_graph(text))
