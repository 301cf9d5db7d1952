"""Secure aggregation simulator: pairwise-masked updates with dropout
recovery, aggregation-friendly quantization, and a signed-transcript
integrity layer.

The heavy lifting lives in the compiled ``secagg._core`` module; this
package adds dict-friendly wrappers.
"""

import json

from secagg._core import (
    ConfigError,
    ProtocolError,
    bench_bytes,
    bench_counts,
    dequantize,
    emit_config,
    keygen,
    quantize,
    verify_transcript,
)
from secagg._core import run_sim as _run_sim

__all__ = [
    "ConfigError",
    "ProtocolError",
    "bench_bytes",
    "bench_counts",
    "dequantize",
    "emit_config",
    "keygen",
    "quantize",
    "run_sim",
    "verify_transcript",
]


def run_sim(config):
    """Run a simulated deployment.

    ``config`` may be a dict or a JSON string. Returns a dict with the
    final model, per-round metrics, and for attested runs the signed
    transcript plus the signer registry needed to verify it.
    """
    if isinstance(config, dict):
        config = json.dumps(config)
    return _run_sim(config)
