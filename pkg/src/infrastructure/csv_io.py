import json

import numpy as np

from src.core import ParseError, UniformSignal


SIGNAL_HEADER = "t,value"
IF_HEADER = "t,freq_hz"

# Relative tolerance on the spacing of the sample times.
UNIFORMITY_TOL = 1e-6


def _format(x):
    return f"{x:.9g}"


def _read_lines(path):
    try:
        with open(path, "r") as f:
            return f.read().splitlines()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def _parse_columns(lines, header, ncols):
    """Parse comma separated numeric rows, skipping the optional `header` line,
    blank lines and `#` comments.
    """
    rows = []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#") or line == header:
            continue
        fields = line.split(",")
        if len(fields) != ncols:
            raise ParseError(f"expected {ncols} comma separated values, got {len(fields)}", number)
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ParseError(f"invalid number in {line!r}", number) from None
    return np.asarray(rows, dtype=np.float64).reshape(-1, ncols)


def _as_uniform(t, values):
    """Check that the times `t` are uniformly spaced and build the signal."""
    if len(t) < 2:
        raise ParseError(f"a signal needs at least 2 samples, got {len(t)}")
    if not np.all(np.isfinite(t)):
        raise ParseError("sample times must be finite")
    step = np.diff(t)
    if np.any(step <= 0):
        bad = int(np.argmax(step <= 0))
        raise ParseError(f"sample times must be strictly increasing, violated at sample {bad + 1}")

    dt = (t[-1] - t[0]) / (len(t) - 1)
    # The written times carry 9 significant digits, so their rounding is tolerated too.
    deviation = np.abs(t - (t[0] + dt * np.arange(len(t))))
    tolerance = UNIFORMITY_TOL * dt + 5e-9 * np.abs(t)
    if np.any(deviation > tolerance):
        bad = int(np.argmax(deviation > tolerance))
        raise ParseError(f"non-uniform sampling at sample {bad}: time {t[bad]!r} deviates by {deviation[bad]:.3g}s "
                         f"from the uniform grid with dt={dt:.9g}")
    return UniformSignal(values, float(_format(dt)), t[0])


def read_signal(path, header=SIGNAL_HEADER):
    """Read a uniformly sampled signal from a two-column CSV file `t,value`.

    Raises:
        core.ParseError: If the file is unreadable, malformed, shorter than two
            samples, or not uniformly sampled.
    """
    data = _parse_columns(_read_lines(path), header, 2)
    return _as_uniform(data[:, 0], data[:, 1])


def write_signal(path, sig, header=SIGNAL_HEADER):
    """Write `sig` as a two-column CSV file with 9 significant digits."""
    with open(path, "w") as f:
        f.write(header + "\n")
        for t, x in zip(sig.times, sig.samples):
            f.write(f"{_format(t)},{_format(x)}\n")


def read_if(path):
    """Read an instantaneous-frequency file `t,freq_hz`."""
    return read_signal(path, IF_HEADER)


def write_if(path, sig):
    write_signal(path, sig, IF_HEADER)


def write_sst_matrix(path, S):
    """Write the squeezed magnitudes |S|, one row per frequency bin.
    The header is `freq_hz` followed by the sample times; every row starts with the
    bin frequency.
    """
    times = S.t0 + S.dt * np.arange(S.values.shape[1])
    magnitude = np.abs(S.values)
    with open(path, "w") as f:
        f.write(",".join(["freq_hz"] + [_format(t) for t in times]) + "\n")
        for xi, row in zip(S.grid.xi, magnitude):
            f.write(",".join([_format(xi)] + [_format(v) for v in row]) + "\n")


def read_sst_matrix(path):
    """Read a file written by `write_sst_matrix`.

    Returns:
        freqs (np.Array): The bin frequencies in Hz.
        times (np.Array): The sample times in seconds.
        magnitude (np.Array): Array of shape (len(freqs), len(times)).
    """
    lines = [line for line in _read_lines(path) if line.strip()]
    if not lines:
        raise ParseError("empty SST matrix file")
    head = lines[0].split(",")
    if head[0] != "freq_hz":
        raise ParseError(f"expected header starting with 'freq_hz', got {head[0]!r}", 1)
    try:
        times = np.array([float(t) for t in head[1:]])
    except ValueError:
        raise ParseError("invalid time in header", 1) from None
    data = _parse_columns(lines[1:], None, len(head))
    return data[:, 0], times, data[:, 1:]


def write_metrics(path, metrics):
    """Write the evaluation results as indented JSON."""
    with open(path, "w") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
        f.write("\n")


def read_metrics(path):
    with open(path, "r") as f:
        return json.load(f)
