"""noisebeam: reward-guided search over initial diffusion noise.

Desk-scale stack for studying inference-time noise search in long video
generation: a strided deterministic sampler, two long-video paradigms
(chunked windows and a rolling diagonal-denoising queue), tilted
candidate pools, cheap one-step scoring, and a reproducible benchmark
harness. Denoisers are exactly solvable stand-ins (conjugate Gaussian
and empirical mixture), so every number in the pipeline can be checked
against closed forms.
"""

__version__ = "0.1.0"

from .schedule import NoiseSchedule, make_schedule, signal_noise

__all__ = ["NoiseSchedule", "make_schedule", "signal_noise", "__version__"]
