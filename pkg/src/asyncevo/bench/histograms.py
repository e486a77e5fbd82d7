"""Return-time and queue-delay exports from executor event traces.

The return-time histogram normalizes each individual's finish time within the
window spanned by its consuming batch (first to last finish of that batch),
so distribution shape can be compared across modes: synchronous batches bunch
their returns, asynchronous batches return at a steady rate.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

RETURN_TIMES_HEADER = ["individualId", "generation", "finishTime", "normalizedReturn"]
QUEUE_DELAY_HEADER = ["individualId", "submitTime", "dispatchTime", "queueDelay"]


class TraceParseError(ValueError):
    pass


@dataclass
class TraceRecord:
    time: float
    event: str
    worker_id: int
    individual_id: int
    generation: int
    queue_len: int
    in_flight: int


def parse_trace(path) -> list[TraceRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "time":
            raise TraceParseError(f"{path}: line 1: missing trace header")
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(
                    TraceRecord(
                        time=float(row[0]),
                        event=row[1],
                        worker_id=int(row[2]),
                        individual_id=int(row[3]),
                        generation=int(row[4]),
                        queue_len=int(row[5]),
                        in_flight=int(row[6]),
                    )
                )
            except (IndexError, ValueError) as exc:
                raise TraceParseError(f"{path}: line {lineno}: {exc}") from exc
    return records


def export_histograms(trace_path, out_dir) -> tuple[Path, Path]:
    """Write per-individual return-time and queue-delay CSVs; returns their paths."""
    records = parse_trace(trace_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(trace_path).stem

    submit: dict[int, float] = {}
    dispatch: dict[int, float] = {}
    finish: dict[int, float] = {}
    consumed_in: dict[int, int] = {}
    for rec in records:
        if rec.event == "submit":
            submit[rec.individual_id] = rec.time
        elif rec.event == "dispatch":
            dispatch[rec.individual_id] = rec.time
        elif rec.event == "finish":
            finish[rec.individual_id] = rec.time
        elif rec.event == "consume":
            consumed_in[rec.individual_id] = rec.generation

    batches: dict[int, list[int]] = {}
    for ind, gen in consumed_in.items():
        batches.setdefault(gen, []).append(ind)
    windows = {
        gen: (min(finish[i] for i in inds), max(finish[i] for i in inds))
        for gen, inds in batches.items()
    }

    return_path = out / f"{stem}_return_times.csv"
    with open(return_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RETURN_TIMES_HEADER)
        for ind in sorted(consumed_in):
            gen = consumed_in[ind]
            lo, hi = windows[gen]
            width = hi - lo
            norm = (finish[ind] - lo) / width if width > 0 else 0.5
            writer.writerow([ind, gen, repr(finish[ind]), repr(norm)])

    delay_path = out / f"{stem}_queue_delay.csv"
    with open(delay_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(QUEUE_DELAY_HEADER)
        for ind in sorted(dispatch):
            if ind not in submit:
                raise TraceParseError(f"{trace_path}: individual {ind} dispatched but never submitted")
            writer.writerow(
                [ind, repr(submit[ind]), repr(dispatch[ind]), repr(dispatch[ind] - submit[ind])]
            )
    return return_path, delay_path


def load_column(path, column: str) -> list[float]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [float(row[column]) for row in csv.DictReader(fh)]
