LINES = []


def record(number, title, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    LINES.append(f"[{status}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))
