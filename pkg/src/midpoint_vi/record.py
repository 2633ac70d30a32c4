"""Trajectory records and their CSV form.

File layout: optional ``# key=value`` metadata lines, then the header
``i,t,q0..q{d-1},p0..p{d-1},H`` and one row per node.  Floats are written
with 17 significant digits so binary64 values survive a round trip.  A run
that stopped early ends with a ``# failure=...`` line.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray = None
    H: np.ndarray = None
    meta: dict = field(default_factory=dict)
    failure: str = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.q = np.asarray(self.q, dtype=float).reshape(len(self.t), -1)
        n, d = self.q.shape
        self.p = np.full((n, d), np.nan) if self.p is None else np.asarray(self.p, float).reshape(n, d)
        self.H = np.full(n, np.nan) if self.H is None else np.asarray(self.H, float).reshape(n)

    @property
    def dim(self):
        return self.q.shape[1]

    def __len__(self):
        return len(self.t)

    def header(self):
        d = self.dim
        return ["i", "t"] + [f"q{k}" for k in range(d)] + [f"p{k}" for k in range(d)] + ["H"]

    def rows(self):
        for i in range(len(self)):
            yield [i, self.t[i], *self.q[i], *self.p[i], self.H[i]]

    def max_energy_deviation(self):
        return float(np.max(np.abs(self.H - self.H[0])))

    def write_csv(self, fh):
        """Write to a path or an open text file."""
        if isinstance(fh, (str, bytes)) or hasattr(fh, "__fspath__"):
            with open(fh, "w", newline="") as f:
                return self.write_csv(f)
        for key, value in self.meta.items():
            fh.write(f"# {key}={json.dumps(value)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([row[0]] + [format(x, ".17g") for x in row[1:]])
        if self.failure:
            fh.write(f"# failure={json.dumps(self.failure)}\n")

    def to_csv_string(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, fh):
        """Inverse of :meth:`write_csv`."""
        if isinstance(fh, (str, bytes)) or hasattr(fh, "__fspath__"):
            with open(fh, newline="") as f:
                return cls.read_csv(f)
        meta, failure, lines = {}, None, []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "failure":
                    failure = json.loads(value)
                else:
                    meta[key] = json.loads(value)
            elif line.strip():
                lines.append(line)
        reader = csv.reader(lines)
        header = next(reader)
        d = sum(1 for name in header if name.startswith("q"))
        data = np.array([[float(x) for x in row[1:]] for row in reader], dtype=float).reshape(-1, 2 * d + 2)
        return cls(data[:, 0], data[:, 1:1 + d], data[:, 1 + d:1 + 2 * d], data[:, -1], meta, failure)
