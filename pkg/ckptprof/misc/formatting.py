import math


def fmt_seconds(value: float) -> str:
    """Seconds with a fixed 9 decimals, so golden files compare byte for byte."""
    if math.isinf(value) or math.isnan(value):
        return str(value)
    text = f"{value:.9f}"
    if text.startswith("-") and float(text) == 0.0:
        return text[1:]
    return text


def fmt_bytes(value: int) -> str:
    return str(int(value))
