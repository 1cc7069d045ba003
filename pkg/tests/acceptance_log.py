"""Per-criterion outcome lines, printed again in the pytest terminal summary."""

LINES: list = []


def report(number: int, name: str, ok: bool, detail: str = "") -> bool:
    line = f"acceptance {number} [{name}]: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    print(line)
    LINES.append(line)
    return ok
