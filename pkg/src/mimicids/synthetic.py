"""Synthetic KDD-shaped connection records.

Used for tests, runtime checks and demos when the real benchmark files are
not at hand. The generator imitates the column layout and the broad shape of
the traffic families (normal sessions, SYN floods, ICMP echo floods, scans,
password guessing, local exploits) with deliberate overlap between benign and
malicious rows. Accuracy numbers measured on this data say nothing about the
real benchmark.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, Schema, kdd_schema

SERVICES = [
    "http", "smtp", "ftp", "ftp_data", "telnet", "domain_u", "private", "ecr_i", "eco_i",
    "finger", "auth", "pop_3", "imap4", "ssh", "other", "urp_i", "ntp_u", "tim_i",
    "whois", "sunrpc", "netbios_ns", "ldap", "gopher", "http_443", "remote_job",
]
FLAGS = ["SF", "S0", "REJ", "RSTR", "RSTO", "SH", "S1", "S2", "S3", "OTH", "RSTOS0"]

# family -> share of rows
MIX = {
    "normal": 0.53,
    "neptune": 0.24,
    "smurf": 0.10,
    "probe": 0.095,
    "r2l": 0.03,
    "u2r": 0.005,
}


def _rates(rng, n, centre, spread):
    return np.clip(np.round(rng.normal(centre, spread, n), 2), 0.0, 1.0)


def _family(rng, fam, n):
    c = {}
    zeros = np.zeros(n)
    for name in kdd_schema().names:
        c[name] = zeros.copy()
    if fam == "normal":
        svc = rng.choice(["http", "smtp", "ftp_data", "domain_u", "private", "ftp", "other",
                          "telnet", "ecr_i", "ntp_u", "pop_3", "ssh"], n,
                         p=[0.45, 0.12, 0.1, 0.1, 0.05, 0.04, 0.04, 0.02, 0.03, 0.02, 0.02, 0.01])
        proto = np.where(np.isin(svc, ["domain_u", "ntp_u", "private"]), "udp",
                         np.where(svc == "ecr_i", "icmp", "tcp"))
        flag = rng.choice(FLAGS[:5], n, p=[0.93, 0.015, 0.035, 0.01, 0.01])
        c["duration"] = np.where(rng.random(n) < 0.9, 0, np.round(rng.exponential(300, n)))
        c["src_bytes"] = np.round(rng.lognormal(5.5, 1.3, n))
        c["dst_bytes"] = np.round(rng.lognormal(7.5, 1.8, n)) * (rng.random(n) < 0.85)
        c["logged_in"] = (svc == "http") | (rng.random(n) < 0.3)
        c["hot"] = rng.poisson(0.15, n)
        c["num_failed_logins"] = rng.random(n) < 0.002
        c["is_guest_login"] = rng.random(n) < 0.005
        c["count"] = rng.integers(1, 30, n) + (rng.random(n) < 0.05) * rng.integers(0, 200, n)
        c["srv_count"] = np.minimum(c["count"], rng.integers(1, 40, n))
        c["serror_rate"] = _rates(rng, n, 0.01, 0.05)
        c["rerror_rate"] = _rates(rng, n, 0.03, 0.08)
        c["same_srv_rate"] = _rates(rng, n, 0.95, 0.12)
        c["diff_srv_rate"] = _rates(rng, n, 0.04, 0.08)
        c["dst_host_count"] = rng.integers(1, 256, n)
        c["dst_host_srv_count"] = rng.integers(1, 256, n)
        c["dst_host_same_srv_rate"] = _rates(rng, n, 0.8, 0.3)
        c["dst_host_diff_srv_rate"] = _rates(rng, n, 0.05, 0.1)
        c["dst_host_same_src_port_rate"] = _rates(rng, n, 0.1, 0.2)
        c["dst_host_serror_rate"] = _rates(rng, n, 0.01, 0.05)
        c["dst_host_rerror_rate"] = _rates(rng, n, 0.04, 0.1)
    elif fam == "neptune":
        svc = rng.choice(SERVICES, n)
        proto = np.full(n, "tcp", dtype=object)
        flag = rng.choice(["S0", "REJ", "SF", "RSTO"], n, p=[0.8, 0.15, 0.03, 0.02])
        c["count"] = rng.integers(60, 512, n)
        c["srv_count"] = rng.integers(1, 30, n)
        sy = (flag == "S0").astype(float)
        c["serror_rate"] = np.clip(sy + rng.normal(0, 0.08, n), 0, 1).round(2)
        c["srv_serror_rate"] = c["serror_rate"]
        c["rerror_rate"] = np.clip(1 - sy + rng.normal(0, 0.08, n), 0, 1).round(2) * (flag != "SF")
        c["same_srv_rate"] = _rates(rng, n, 0.06, 0.06)
        c["diff_srv_rate"] = _rates(rng, n, 0.06, 0.04)
        c["dst_host_count"] = np.full(n, 255.0)
        c["dst_host_srv_count"] = rng.integers(1, 30, n)
        c["dst_host_same_srv_rate"] = _rates(rng, n, 0.07, 0.06)
        c["dst_host_diff_srv_rate"] = _rates(rng, n, 0.07, 0.04)
        c["dst_host_serror_rate"] = c["serror_rate"]
        c["dst_host_srv_serror_rate"] = c["serror_rate"]
        c["dst_host_rerror_rate"] = c["rerror_rate"]
    elif fam == "smurf":
        svc = rng.choice(["ecr_i", "eco_i", "urp_i"], n, p=[0.9, 0.07, 0.03])
        proto = np.full(n, "icmp", dtype=object)
        flag = np.full(n, "SF", dtype=object)
        c["src_bytes"] = rng.choice([1032.0, 520.0, 1480.0, 28.0], n, p=[0.7, 0.2, 0.05, 0.05])
        c["count"] = np.where(rng.random(n) < 0.8, 511, rng.integers(1, 511, n))
        c["srv_count"] = c["count"]
        c["same_srv_rate"] = np.ones(n)
        c["dst_host_count"] = np.full(n, 255.0)
        c["dst_host_srv_count"] = np.full(n, 255.0)
        c["dst_host_same_srv_rate"] = np.ones(n)
        c["dst_host_same_src_port_rate"] = _rates(rng, n, 0.9, 0.2)
    elif fam == "probe":
        svc = rng.choice(SERVICES, n)
        proto = rng.choice(["tcp", "udp", "icmp"], n, p=[0.6, 0.15, 0.25])
        flag = rng.choice(["REJ", "RSTO", "SF", "S0", "SH", "RSTOS0"], n, p=[0.35, 0.2, 0.25, 0.1, 0.05, 0.05])
        c["duration"] = np.where(rng.random(n) < 0.95, 0, rng.integers(1, 30000, n))
        c["src_bytes"] = np.where(rng.random(n) < 0.7, 0, rng.integers(1, 60, n))
        c["count"] = rng.integers(1, 200, n)
        c["srv_count"] = rng.integers(1, 20, n)
        c["rerror_rate"] = _rates(rng, n, 0.6, 0.35)
        c["srv_rerror_rate"] = c["rerror_rate"]
        c["same_srv_rate"] = _rates(rng, n, 0.3, 0.3)
        c["diff_srv_rate"] = _rates(rng, n, 0.5, 0.3)
        c["dst_host_count"] = rng.integers(1, 256, n)
        c["dst_host_srv_count"] = rng.integers(1, 20, n)
        c["dst_host_same_srv_rate"] = _rates(rng, n, 0.2, 0.25)
        c["dst_host_diff_srv_rate"] = _rates(rng, n, 0.6, 0.3)
        c["dst_host_same_src_port_rate"] = _rates(rng, n, 0.7, 0.3)
        c["dst_host_rerror_rate"] = _rates(rng, n, 0.5, 0.35)
    elif fam == "r2l":
        svc = rng.choice(["ftp", "ftp_data", "telnet", "imap4", "pop_3", "http"], n)
        proto = np.full(n, "tcp", dtype=object)
        flag = rng.choice(["SF", "RSTO", "S1"], n, p=[0.85, 0.1, 0.05])
        c["duration"] = np.round(rng.exponential(200, n))
        c["src_bytes"] = np.round(rng.lognormal(6.0, 1.5, n))
        c["dst_bytes"] = np.round(rng.lognormal(6.5, 2.0, n)) * (rng.random(n) < 0.6)
        c["hot"] = rng.poisson(1.5, n)
        c["num_failed_logins"] = rng.random(n) < 0.3
        c["logged_in"] = rng.random(n) < 0.6
        c["is_guest_login"] = rng.random(n) < 0.35
        c["count"] = rng.integers(1, 10, n)
        c["srv_count"] = rng.integers(1, 10, n)
        c["same_srv_rate"] = np.ones(n)
        c["dst_host_count"] = rng.integers(1, 256, n)
        c["dst_host_srv_count"] = rng.integers(1, 100, n)
        c["dst_host_same_srv_rate"] = _rates(rng, n, 0.5, 0.35)
        c["dst_host_same_src_port_rate"] = _rates(rng, n, 0.4, 0.35)
    elif fam == "u2r":
        svc = rng.choice(["telnet", "ftp_data", "ftp", "other"], n)
        proto = np.full(n, "tcp", dtype=object)
        flag = np.full(n, "SF", dtype=object)
        c["duration"] = np.round(rng.exponential(100, n))
        c["src_bytes"] = np.round(rng.lognormal(6.5, 1.5, n))
        c["dst_bytes"] = np.round(rng.lognormal(8, 1.5, n))
        c["logged_in"] = np.ones(n)
        c["hot"] = rng.poisson(2, n)
        c["root_shell"] = rng.random(n) < 0.6
        c["num_file_creations"] = rng.poisson(1, n)
        c["num_shells"] = rng.random(n) < 0.3
        c["count"] = rng.integers(1, 5, n)
        c["srv_count"] = rng.integers(1, 5, n)
        c["same_srv_rate"] = np.ones(n)
        c["dst_host_count"] = rng.integers(1, 256, n)
        c["dst_host_srv_count"] = rng.integers(1, 50, n)
        c["dst_host_same_srv_rate"] = _rates(rng, n, 0.3, 0.3)
    else:
        raise ValueError(fam)
    c["protocol_type"] = np.asarray(proto, dtype=object)
    c["service"] = np.asarray(svc, dtype=object)
    c["flag"] = np.asarray(flag, dtype=object)
    return c


def synthetic_kdd(n: int, seed: int = 0, label_noise: float = 0.002,
                  schema: Schema | None = None) -> Dataset:
    """``n`` labeled KDD-shaped rows (shuffled), with a small fraction of flipped labels."""
    schema = schema or kdd_schema()
    rng = np.random.default_rng(seed)
    fams = list(MIX)
    counts = rng.multinomial(n, [MIX[f] for f in fams])
    blocks, labels = [], []
    for fam, k in zip(fams, counts):
        if k == 0:
            continue
        blocks.append(_family(rng, fam, int(k)))
        labels.append(np.full(k, 0 if fam == "normal" else 1, np.int8))
    y = np.concatenate(labels)
    flip = rng.random(n) < label_noise
    y = np.where(flip, 1 - y, y).astype(np.int8)
    cont = np.column_stack([
        np.concatenate([np.asarray(b[schema.columns[j].name], dtype=np.float64) for b in blocks])
        for j in schema.continuous_index
    ])
    cat = np.column_stack([
        np.concatenate([b[schema.columns[j].name] for b in blocks]) for j in schema.categorical_index
    ]).astype(object)
    order = rng.permutation(n)
    return Dataset(schema, cont[order], cat[order], y[order])
