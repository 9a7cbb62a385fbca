"""CSV ingestion and deterministic artifact writers."""

import csv
import hashlib
import json
from datetime import datetime, timezone

import numpy as np

from .series import Series, TradingCalendar

CSV_HEADER = ("timestamp", "price", "volume")


class CsvFormatError(ValueError):
    """Malformed input CSV; message carries the offending line number."""


def _parse_timestamp(token, line_no):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(token)
    except ValueError as exc:
        raise CsvFormatError(f"line {line_no}: bad timestamp {token!r}") from exc
    if dt.second or dt.microsecond:
        raise CsvFormatError(
            f"line {line_no}: timestamp {token!r} is finer than minute resolution"
        )
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() // 60)


def read_price_volume_csv(path, calendar: TradingCalendar = None):
    """Read a `timestamp,price,volume` CSV into (price, volume) series.

    Timestamps are ISO-8601 at minute resolution or integer minutes since
    epoch; rows must be one per minute inside the calendar sessions.
    """
    calendar = calendar or TradingCalendar()
    timestamps = []
    prices = []
    volumes = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("line 1: empty file") from None
        if tuple(h.strip().lower() for h in header) != CSV_HEADER:
            raise CsvFormatError(
                f"line 1: header must be {','.join(CSV_HEADER)!r}, got {header!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise CsvFormatError(f"line {line_no}: expected 3 fields, got {len(row)}")
            ts = _parse_timestamp(row[0], line_no)
            try:
                price = float(row[1])
                volume = float(row[2])
            except ValueError as exc:
                raise CsvFormatError(f"line {line_no}: non-numeric field: {exc}") from exc
            if not np.isfinite(price) or not np.isfinite(volume):
                raise CsvFormatError(f"line {line_no}: non-finite value")
            if not calendar.contains(ts):
                raise CsvFormatError(
                    f"line {line_no}: timestamp {row[0].strip()!r} outside the "
                    f"trading session"
                )
            if timestamps and ts <= timestamps[-1]:
                raise CsvFormatError(
                    f"line {line_no}: timestamps must be strictly increasing"
                )
            timestamps.append(ts)
            prices.append(price)
            volumes.append(volume)
    if not timestamps:
        raise CsvFormatError("line 2: no data rows")
    ts = np.asarray(timestamps, dtype=np.int64)
    return (
        Series(timestamps=ts, values=np.asarray(prices), calendar=calendar),
        Series(timestamps=ts, values=np.asarray(volumes), calendar=calendar),
    )


def write_price_volume_csv(path, timestamps, prices, volumes):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for ts, p, v in zip(timestamps, prices, volumes):
            writer.writerow([int(ts), fmt(p), fmt(v)])


def fmt(x):
    """Deterministic float formatting for emitted artifacts."""
    return format(float(x), ".12g")


def write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [fmt(c) if isinstance(c, (float, np.floating)) else c for c in row]
            )


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
