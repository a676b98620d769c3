"""
Utility functions for the loop braid integrability toolkit
"""
import numpy as np
import os
import re
import tempfile
from pathlib import Path
from typing import Any, List, Union
import logging

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

ComplexLike = Union[int, float, complex, str]

_COMPLEX_RE = re.compile(r'^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$')


def get_logger(name: str):
    """Get a logger instance"""
    return logging.getLogger(name)


def setup_logging(level: str = "INFO", fmt: str = None):
    """Reconfigure the root logger (level name and optional format)"""
    root = logging.getLogger()
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    if fmt:
        for handler in root.handlers:
            handler.setFormatter(logging.Formatter(fmt))


def banner(logger, title: str, char: str = "=", width: int = 70):
    """Log a section header framed by separator lines"""
    logger.info(char * width)
    logger.info(title)
    logger.info(char * width)


def parse_complex(value: ComplexLike) -> complex:
    """
    Parse a complex number from a number or a string

    Accepted string forms: "1.5", "-2", "0.5+0.5i", "1-2i", "2i", "-i", "3e-2+1e-1i"

    Raises:
    -------
    ValueError if the text is not a complex number
    """
    if isinstance(value, bool):
        raise ValueError(f"Not a complex number: {value!r}")
    if isinstance(value, (int, float, complex, np.number)):
        return complex(value)
    if not isinstance(value, str):
        raise ValueError(f"Not a complex number: {value!r}")

    text = value.replace(" ", "").replace("I", "i").replace("j", "i")
    if not text:
        raise ValueError("Empty complex number")
    if _COMPLEX_RE.match(text):
        return complex(float(text), 0.0)

    if not text.endswith("i"):
        raise ValueError(f"Not a complex number: {value!r}")
    body = text[:-1]

    # split at the last sign that is not part of an exponent
    split = None
    for pos in range(len(body) - 1, 0, -1):
        if body[pos] in "+-" and body[pos - 1] not in "eE":
            split = pos
            break

    if split is None:
        real_part, imag_part = "", body
    else:
        real_part, imag_part = body[:split], body[split:]

    if imag_part in ("", "+"):
        imag_part = "1"
    elif imag_part == "-":
        imag_part = "-1"

    if (real_part and not _COMPLEX_RE.match(real_part)) or not _COMPLEX_RE.match(imag_part):
        raise ValueError(f"Not a complex number: {value!r}")

    return complex(float(real_part) if real_part else 0.0, float(imag_part))


def format_complex(z: ComplexLike) -> str:
    """Shortest text that parse_complex reads back, e.g. "0.3" or "0.5-0.25i" """
    z = parse_complex(z)

    def part(x: float) -> str:
        text = repr(float(x))
        return text[:-2] if text.endswith('.0') else text

    if z.imag == 0:
        return part(z.real)
    imag = f"{part(z.imag)}i"
    if z.real == 0:
        return imag
    return f"{part(z.real)}{imag if z.imag < 0 else '+' + imag}"


def complex_to_json(z: complex) -> Any:
    """Real numbers stay plain floats; complex numbers become [re, im]"""
    z = complex(z)
    if z.imag == 0.0:
        return float(z.real)
    return [float(z.real), float(z.imag)]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars and complex numbers for json.dump"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based deterministic generator (Philox); streams are independent"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def random_complex(rng: np.random.Generator, size=None, radius: float = 1.0):
    """Uniform samples from the complex disc of the given radius"""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size))
    phi = rng.uniform(0.0, 2 * np.pi, size)
    return r * np.exp(1j * phi)


def write_atomic(path: Union[str, Path], text: str):
    """Write a text file in one step (temporary file, then rename)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def parse_complex_list(text: str) -> List[complex]:
    """Comma-separated complex numbers, e.g. "0,1" or "0.5i, 2" """
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError(f"Empty coefficient list: {text!r}")
    return [parse_complex(item.strip()) for item in items]
