"""Model server speaking the chartseek provider wire protocol.

Serves /embed/image, /embed/text, /zero_shot, /classify, /trend_feature,
and /segment. Real CLIP-class encoders load lazily; ``--stub`` mode serves
deterministic hash-seeded vectors so the server can run without weights.
"""

from chartseek_sidecar.backend import Backend, ClipBackend, StubBackend
from chartseek_sidecar.server import create_app
from chartseek_sidecar.finetune import alpha_from_counts, finetune_classifier

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "ClipBackend",
    "StubBackend",
    "alpha_from_counts",
    "create_app",
    "finetune_classifier",
]
