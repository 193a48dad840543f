"""
JSON helpers. Every number leaves the toolkit as a decimal string so that
results survive a round trip at full working precision.
"""

import json
import re
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from mpmath import mp, mpc, mpf

from .arith import Matrix2Z
from .exceptions import InvalidArgumentError
from .qforms import QuadForm

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?\s*"
    r"(?P<im>[+-]\s*(\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?\s*[ij])?\s*$"
)


def dec(x: Union[int, mpf, float], digits: Optional[int] = None) -> str:
    """Decimal string of a real number at `digits` significant digits."""
    digits = digits or mp.dps
    return mp.nstr(mp.mpf(x), digits, strip_zeros=False)


def complex_dict(z: Union[mpc, mpf, int], digits: Optional[int] = None) -> Dict[str, str]:
    z = mp.mpc(z)
    return {"re": dec(z.real, digits), "im": dec(z.imag, digits)}


def complex_from_dict(data: Dict[str, Any]) -> mpc:
    try:
        return mp.mpc(mp.mpf(str(data["re"])), mp.mpf(str(data.get("im", "0"))))
    except (KeyError, ValueError, TypeError) as e:
        raise InvalidArgumentError(f"Invalid complex object {data!r}") from e


def parse_complex(text: Union[str, Dict[str, Any]]) -> mpc:
    """Parse "0.5", "1+0.3i", "1+0.3j", "-2i" or a JSON {"re", "im"} object."""
    if isinstance(text, dict):
        return complex_from_dict(text)
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            return complex_from_dict(json.loads(stripped))
        except json.JSONDecodeError as e:
            raise InvalidArgumentError(f"Invalid complex literal '{text}'") from e
    match = _COMPLEX_RE.match(stripped)
    if not stripped or not match or not (match.group("re") or match.group("im")):
        raise InvalidArgumentError(f"Invalid complex literal '{text}'")
    real = mp.mpf(match.group("re")) if match.group("re") else mp.mpf(0)
    imag = mp.mpf(0)
    if match.group("im"):
        body = match.group("im").replace(" ", "")[:-1]
        imag = mp.mpf(body + "1") if body in ("+", "-") else mp.mpf(body)
    return mp.mpc(real, imag)


def parse_rational(text: str) -> Tuple[int, int]:
    """Parse "a/c" (or an integer) into a reduced pair (a, c) with c > 0."""
    from math import gcd

    try:
        if "/" in text:
            num, den = (int(part) for part in text.split("/"))
        else:
            num, den = int(text), 1
    except ValueError as e:
        raise InvalidArgumentError(f"Invalid rational literal '{text}'") from e
    if den == 0:
        raise InvalidArgumentError(f"Zero denominator in '{text}'")
    if den < 0:
        num, den = -num, -den
    g = gcd(num, den)
    return num // g, den // g


def parse_matrix(text: Union[str, list]) -> Matrix2Z:
    """Parse "a,b,c,d" or [a, b, c, d]."""
    try:
        entries = text if isinstance(text, list) else text.split(",")
        a, b, c, d = (int(x) for x in entries)
    except (ValueError, TypeError) as e:
        raise InvalidArgumentError(f"Invalid matrix literal '{text}'") from e
    return Matrix2Z(a, b, c, d)


def parse_form(text: str) -> QuadForm:
    return QuadForm.parse(text)


def parse_range(text: str) -> Tuple[int, int]:
    """Parse "lo..hi" (inclusive)."""
    try:
        lo, hi = (int(part) for part in text.split(".."))
    except ValueError as e:
        raise InvalidArgumentError(f"Invalid range '{text}', expected lo..hi") from e
    if lo > hi:
        raise InvalidArgumentError(f"Empty range '{text}'")
    return lo, hi


def to_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def dump_json(obj: Any, path: Optional[Union[str, Path]] = None) -> None:
    """Write obj as JSON to path, or to stdout when path is None."""
    text = to_json(obj)
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")


def load_json(path: Union[str, Path]) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidArgumentError(f"Could not read JSON from {path}: {e}") from e
