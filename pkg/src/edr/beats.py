from collections import namedtuple

import numpy as np
from scipy import signal as spsig

from src.core import BEAT_LABELS, BeatSeries, InsufficientBeatsError, ParseError


MIN_BEATS = 4
ANNOTATION_HEADER = "t,label"
PVC_BURDEN_LIMIT = 0.04


def _top_decile_median(x):
    """Median of the largest 10% of the positive values of `x`, 0 if there are none."""
    x = x[x > 0]
    if len(x) == 0:
        return 0.0
    return float(np.median(x[x >= np.percentile(x, 90)]))


def detect_polarity(x):
    """Return "R" if the positive excursions of `x` dominate, "S" otherwise."""
    return "R" if _top_decile_median(x) >= _top_decile_median(-x) else "S"


def detect_peaks(ecg, refractory_s=0.2):
    """Detect the beats of a detrended single-lead ECG.

    The polarity is decided by amplitude dominance of the positive over the negative
    excursions, which stands in for the Rs / rS pattern of the lead. Candidate peaks
    are local maxima of the polarity-corrected signal at least `refractory_s` apart.
    Candidates are accepted by a Pan-Tompkins style adaptive threshold that tracks
    running estimates of the signal-peak and noise-peak levels.

    Args:
        ecg (core.UniformSignal): The detrended ECG.
        refractory_s (float, optional): Minimal spacing of two beats in seconds.
            Default value is 0.2.

    Returns:
        beats (core.BeatSeries): The detected beats, all labelled "N".
    """
    polarity = detect_polarity(ecg.samples)
    x = ecg.samples if polarity == "R" else -ecg.samples
    distance = max(1, int(round(refractory_s / ecg.dt)))
    candidates, _ = spsig.find_peaks(x, distance=distance)
    if len(candidates) < MIN_BEATS:
        raise InsufficientBeatsError(
            f"Detected {len(candidates)} beats, at least {MIN_BEATS} needed")

    # Beats are at least one in seven candidates, so the 90th percentile is a beat.
    heights = x[candidates]
    spki = np.percentile(heights, 90)
    noise = heights[heights < 0.5 * spki]
    npki = float(np.median(noise)) if len(noise) else 0.0
    peaks = []
    for idx in candidates:
        peak = x[idx]
        threshold = npki + 0.25 * (spki - npki)
        if peak > threshold:
            peaks.append(idx)
            spki = 0.125 * peak + 0.875 * spki
        else:
            npki = 0.125 * peak + 0.875 * npki

    if len(peaks) < MIN_BEATS:
        raise InsufficientBeatsError(f"Detected {len(peaks)} beats, at least {MIN_BEATS} needed")
    times = ecg.t0 + ecg.dt * np.asarray(peaks, dtype=np.float64)
    return BeatSeries(times, None, polarity)


def load_annotations(beats_text, polarity="R", t0=0.0):
    """Parse beat annotations, one `<time_seconds>,<label>` record per line.
    Lines starting with `#` and the optional `t,label` header are ignored. The file
    times are relative to the start `t0` of the ECG record; the returned beats carry
    absolute times, as the detector does.

    Args:
        beats_text (str or Iterable[str]): The annotation text or its lines.
        polarity (str, optional): Polarity recorded on the result. Default value is "R".
        t0 (float, optional): Start time of the ECG record. Default value is 0.0.

    Returns:
        beats (core.BeatSeries): The parsed beats.
    """
    lines = beats_text.splitlines() if isinstance(beats_text, str) else list(beats_text)
    times, labels = [], []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#") or line == ANNOTATION_HEADER:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2:
            raise ParseError(f"expected '<time>,<label>', got {line!r}", number)
        try:
            t = float(fields[0])
        except ValueError:
            raise ParseError(f"invalid time {fields[0]!r}", number) from None
        if not np.isfinite(t):
            raise ParseError(f"invalid time {fields[0]!r}", number)
        if fields[1] not in BEAT_LABELS:
            raise ParseError(f"unknown label {fields[1]!r}, expected one of {BEAT_LABELS}", number)
        times.append(t)
        labels.append(fields[1])
    if not times:
        raise InsufficientBeatsError("The annotations contain no beats")
    if np.any(np.diff(times) <= 0):
        raise ValueError("Annotated beat times must be strictly increasing")
    return BeatSeries(t0 + np.asarray(times), labels, polarity)


def dump_annotations(beats, t0=0.0):
    """Serialize beats in the format read by `load_annotations`, with times relative
    to the record start `t0`."""
    rows = [ANNOTATION_HEADER]
    rows += [f"{t - t0:.9g},{label}" for t, label in zip(beats.times, beats.labels)]
    return "\n".join(rows) + "\n"


"""Beat counts of a record.
`pvc_burden_exceeded` flags records whose PVC share of the total beats is above 4%,
the limit beyond which the beat-amplitude spline is considered compromised.
"""
BeatCensus = namedtuple("BeatCensus",
    ["total", "normal", "pvc", "pac", "pvc_ratio", "pvc_burden_exceeded"])


def beat_census(beats):
    labels = list(beats.labels)
    total = len(labels)
    pvc = labels.count("PVC")
    ratio = pvc / total if total else 0.0
    return BeatCensus(total, labels.count("N"), pvc, labels.count("PAC"), ratio,
                      ratio > PVC_BURDEN_LIMIT)
