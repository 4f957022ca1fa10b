"""Built-in LaTeX command to Unicode table used by the renderer."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Optional

GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ", "epsilon": "ϵ",
    "varepsilon": "ε", "zeta": "ζ", "eta": "η", "theta": "θ", "vartheta": "ϑ",
    "iota": "ι", "kappa": "κ", "varkappa": "ϰ", "lambda": "λ", "mu": "μ",
    "nu": "ν", "xi": "ξ", "omicron": "ο", "pi": "π", "varpi": "ϖ", "rho": "ρ",
    "varrho": "ϱ", "sigma": "σ", "varsigma": "ς", "tau": "τ", "upsilon": "υ",
    "phi": "ϕ", "varphi": "φ", "chi": "χ", "psi": "ψ", "omega": "ω",
    "Gamma": "Γ", "Delta": "Δ", "Theta": "Θ", "Lambda": "Λ", "Xi": "Ξ",
    "Pi": "Π", "Sigma": "Σ", "Upsilon": "Υ", "Phi": "Φ", "Psi": "Ψ",
    "Omega": "Ω", "varGamma": "Γ", "varDelta": "Δ", "varTheta": "Θ",
    "varLambda": "Λ", "varXi": "Ξ", "varPi": "Π", "varSigma": "Σ",
    "varUpsilon": "Υ", "varPhi": "Φ", "varPsi": "Ψ", "varOmega": "Ω",
    "digamma": "ϝ",
}

RELATIONS = {
    "leq": "≤", "le": "≤", "geq": "≥", "ge": "≥", "neq": "≠", "ne": "≠",
    "leqslant": "⩽", "geqslant": "⩾", "leqq": "≦", "geqq": "≧",
    "ll": "≪", "gg": "≫", "lll": "⋘", "ggg": "⋙", "prec": "≺", "succ": "≻",
    "preceq": "⪯", "succeq": "⪰", "preccurlyeq": "≼", "succcurlyeq": "≽",
    "sim": "∼", "simeq": "≃", "approx": "≈", "cong": "≅", "equiv": "≡",
    "asymp": "≍", "doteq": "≐", "propto": "∝", "models": "⊨", "vdash": "⊢",
    "dashv": "⊣", "perp": "⊥", "parallel": "∥", "nparallel": "∦", "mid": "∣",
    "nmid": "∤", "divides": "∣", "in": "∈", "ni": "∋", "owns": "∋", "notin": "∉",
    "subset": "⊂", "supset": "⊃", "subseteq": "⊆", "supseteq": "⊇",
    "subsetneq": "⊊", "supsetneq": "⊋", "nsubseteq": "⊈", "nsupseteq": "⊉",
    "sqsubset": "⊏", "sqsupset": "⊐", "sqsubseteq": "⊑", "sqsupseteq": "⊒",
    "lessdot": "⋖", "gtrdot": "⋗", "lesssim": "≲", "gtrsim": "≳",
    "nless": "≮", "ngtr": "≯", "nleq": "≰", "ngeq": "≱", "nsim": "≁",
    "ncong": "≇", "triangleleft": "◁", "triangleright": "▷",
    "trianglelefteq": "⊴", "trianglerighteq": "⊵", "lhd": "⊲", "rhd": "⊳",
    "unlhd": "⊴", "unrhd": "⊵", "bowtie": "⋈", "smile": "⌣", "frown": "⌢",
    "coloneqq": "≔", "eqqcolon": "≕", "vDash": "⊨", "Vdash": "⊩",
    "ltimes": "⋉", "rtimes": "⋊",
}

OPERATORS = {
    "times": "×", "div": "÷", "pm": "±", "mp": "∓", "cdot": "⋅", "ast": "∗",
    "star": "⋆", "circ": "∘", "bullet": "∙", "oplus": "⊕", "ominus": "⊖",
    "otimes": "⊗", "oslash": "⊘", "odot": "⊙", "cap": "∩", "cup": "∪",
    "sqcap": "⊓", "sqcup": "⊔", "uplus": "⊎", "wedge": "∧", "land": "∧",
    "vee": "∨", "lor": "∨", "setminus": "∖", "smallsetminus": "∖",
    "wr": "≀", "diamond": "⋄", "bigtriangleup": "△", "bigtriangledown": "▽",
    "amalg": "⨿", "dagger": "†", "ddagger": "‡", "boxplus": "⊞",
    "boxminus": "⊟", "boxtimes": "⊠", "boxdot": "⊡", "triangle": "△",
    "sum": "∑", "prod": "∏", "coprod": "∐", "int": "∫", "iint": "∬",
    "iiint": "∭", "oint": "∮", "bigcap": "⋂", "bigcup": "⋃",
    "bigsqcup": "⨆", "bigvee": "⋁", "bigwedge": "⋀", "bigoplus": "⨁",
    "bigotimes": "⨂", "bigodot": "⨀", "biguplus": "⨄",
    "neg": "¬", "lnot": "¬", "forall": "∀", "exists": "∃", "nexists": "∄",
    "emptyset": "∅", "varnothing": "∅", "infty": "∞", "partial": "∂",
    "nabla": "∇", "aleph": "ℵ", "beth": "ℶ", "gimel": "ℷ", "hbar": "ℏ",
    "ell": "ℓ", "wp": "℘", "Re": "ℜ", "Im": "ℑ", "prime": "′",
    "backprime": "‵", "surd": "√", "top": "⊤", "bot": "⊥", "angle": "∠",
    "measuredangle": "∡", "sharp": "♯", "flat": "♭", "natural": "♮",
    "clubsuit": "♣", "diamondsuit": "♢", "heartsuit": "♡", "spadesuit": "♠",
    "Box": "□", "square": "□", "blacksquare": "■", "Diamond": "◇",
    "lozenge": "◊", "checkmark": "✓", "complement": "∁", "imath": "ı",
    "jmath": "ȷ", "therefore": "∴", "because": "∵", "mho": "℧",
}

ARROWS = {
    "to": "→", "rightarrow": "→", "leftarrow": "←", "gets": "←",
    "leftrightarrow": "↔", "Rightarrow": "⇒", "Leftarrow": "⇐",
    "Leftrightarrow": "⇔", "implies": "⟹", "impliedby": "⟸", "iff": "⟺",
    "longrightarrow": "⟶", "longleftarrow": "⟵", "longleftrightarrow": "⟷",
    "Longrightarrow": "⟹", "Longleftarrow": "⟸", "Longleftrightarrow": "⟺",
    "mapsto": "↦", "longmapsto": "⟼", "hookrightarrow": "↪",
    "hookleftarrow": "↩", "uparrow": "↑", "downarrow": "↓",
    "updownarrow": "↕", "Uparrow": "⇑", "Downarrow": "⇓",
    "Updownarrow": "⇕", "nearrow": "↗", "searrow": "↘", "swarrow": "↙",
    "nwarrow": "↖", "rightharpoonup": "⇀", "rightharpoondown": "⇁",
    "leftharpoonup": "↼", "leftharpoondown": "↽", "rightleftharpoons": "⇌",
    "twoheadrightarrow": "↠", "twoheadleftarrow": "↞",
    "rightarrowtail": "↣", "leftarrowtail": "↢", "rightsquigarrow": "⇝",
    "leadsto": "⇝", "circlearrowleft": "↺", "circlearrowright": "↻",
    "curvearrowleft": "↶", "curvearrowright": "↷", "nrightarrow": "↛",
    "nleftarrow": "↚", "nRightarrow": "⇏", "nLeftarrow": "⇍",
    "nleftrightarrow": "↮", "nLeftrightarrow": "⇎", "upharpoonright": "↾",
    "restriction": "↾",
}

DELIMITERS = {
    "langle": "⟨", "rangle": "⟩", "lceil": "⌈", "rceil": "⌉",
    "lfloor": "⌊", "rfloor": "⌋", "lvert": "|", "rvert": "|",
    "lVert": "‖", "rVert": "‖", "vert": "|", "Vert": "‖", "|": "‖",
    "backslash": "\\", "llbracket": "⟦", "rrbracket": "⟧",
}

DOTS = {
    "ldots": "…", "dots": "…", "cdots": "⋯", "vdots": "⋮", "ddots": "⋱",
    "dotsc": "…", "dotsb": "⋯", "dotsm": "⋯", "dotsi": "⋯", "dotso": "…",
    "textellipsis": "…",
}

TEXT_SYMBOLS = {
    "%": "%", "&": "&", "#": "#", "_": "_", "{": "{", "}": "}", "$": "$",
    " ": " ", ",": " ", ";": " ", ":": " ", ">": " ", "!": "", "-": "",
    "/": "", "@": "", "quad": " ", "qquad": " ", "enspace": " ",
    "thinspace": " ", "medspace": " ", "thickspace": " ", "space": " ",
    "textendash": "–", "textemdash": "—", "textquoteleft": "‘",
    "textquoteright": "’", "textquotedblleft": "“", "textquotedblright": "”",
    "guillemotleft": "«", "guillemotright": "»", "textbackslash": "\\",
    "textasciitilde": "~", "textasciicircum": "^", "textbar": "|",
    "textless": "<", "textgreater": ">", "textbullet": "•",
    "textdagger": "†", "textdaggerdbl": "‡", "textsection": "§",
    "textparagraph": "¶", "S": "§", "P": "¶", "copyright": "©",
    "textcopyright": "©", "textregistered": "®", "texttrademark": "™",
    "pounds": "£", "textsterling": "£", "euro": "€", "textdegree": "°",
    "degree": "°", "ss": "ß", "SS": "SS", "ae": "æ", "AE": "Æ", "oe": "œ",
    "OE": "Œ", "aa": "å", "AA": "Å", "o": "ø", "O": "Ø", "l": "ł", "L": "Ł",
    "i": "ı", "j": "ȷ", "dh": "ð", "DH": "Ð", "th": "þ", "TH": "Þ",
    "ng": "ŋ", "NG": "Ŋ", "LaTeX": "LaTeX", "TeX": "TeX", "LaTeXe": "LaTeX2e",
    "slash": "/", "lbrace": "{", "rbrace": "}", "lbrack": "[", "rbrack": "]",
    "textunderscore": "_",
}

# accent command -> combining character
ACCENTS = {
    "'": "\u0301", "`": "\u0300", "^": "\u0302", '"': "\u0308", "~": "\u0303",
    "=": "\u0304", ".": "\u0307", "u": "\u0306", "v": "\u030c", "H": "\u030b",
    "c": "\u0327", "d": "\u0323", "b": "\u0331", "r": "\u030a", "k": "\u0328",
    "t": "\u0361", "acute": "\u0301", "grave": "\u0300", "hat": "\u0302",
    "ddot": "\u0308", "tilde": "\u0303", "bar": "\u0304", "dot": "\u0307",
    "breve": "\u0306", "check": "\u030c", "vec": "\u20d7", "mathring": "\u030a",
    "widehat": "\u0302", "widetilde": "\u0303", "overline": "\u0305",
}

SYMBOLS: Dict[str, str] = {}
for _table in (GREEK, RELATIONS, OPERATORS, ARROWS, DELIMITERS, DOTS, TEXT_SYMBOLS):
    SYMBOLS.update(_table)

# log-like operator names render as their own name
for _op in (
    "log lg ln exp sin cos tan cot sec csc sinh cosh tanh arcsin arccos arctan "
    "min max sup inf lim liminf limsup det dim ker deg gcd lcm arg hom Pr mod bmod"
).split():
    SYMBOLS.setdefault(_op, _op)


def load_symbol_table(override: Optional[Path] = None) -> Dict[str, str]:
    """Built-in table, optionally merged with a JSON override file.

    Override keys may be written with or without the leading backslash.
    """
    table = dict(SYMBOLS)
    if override is not None:
        with open(override, encoding="utf-8") as fh:
            extra = json.load(fh)
        if not isinstance(extra, dict):
            raise ValueError("symbol override must be a JSON object")
        for key, value in extra.items():
            table[key[1:] if key.startswith("\\") else key] = str(value)
    return table
