"""Synthetic corpus with planted per-unit statistics.

Each template binds a topic (fixed noun phrase) to one unit. Sarcastic and
non-sarcastic tweets share the template text; only the number differs, drawn
from class-specific Gaussians whose means sit at least six sigma apart. The
rule cascade therefore has everything it needs: noun overlap finds the
template, the unit matches, and the interval test separates the classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import LabeledTweet
from .errors import DataError

__all__ = ["SynthTemplate", "TEMPLATES", "generate"]


@dataclass(frozen=True)
class SynthTemplate:
    text: str  # contains {v}
    unit: str
    sarc_mean: float
    nonsarc_mean: float
    sigma: float
    minimum: int = 1

    def __post_init__(self) -> None:
        if abs(self.sarc_mean - self.nonsarc_mean) < 6.0 * self.sigma:
            raise DataError(
                f"template {self.unit!r}: class means closer than 6 sigma"
            )


TEMPLATES: tuple[SynthTemplate, ...] = (
    SynthTemplate(
        "this phone has an awesome battery backup of {v} hours",
        "hours", sarc_mean=3.0, nonsarc_mean=38.0, sigma=1.0,
    ),
    SynthTemplate(
        "love waking up at {v} am for the morning shift",
        "am", sarc_mean=4.0, nonsarc_mean=10.0, sigma=0.8,
    ),
    SynthTemplate(
        "great bus commute only took {v} minutes today",
        "minutes", sarc_mean=95.0, nonsarc_mean=15.0, sigma=5.0,
    ),
    SynthTemplate(
        "so productive when my room is {v} degrees",
        "degrees", sarc_mean=81.0, nonsarc_mean=21.0, sigma=2.0,
    ),
    SynthTemplate(
        "wonderful vacation of {v} days this summer",
        "days", sarc_mean=2.0, nonsarc_mean=20.0, sigma=1.0,
    ),
    SynthTemplate(
        "nice easy run of {v} miles before breakfast",
        "miles", sarc_mean=26.0, nonsarc_mean=4.0, sigma=1.5,
    ),
)

_FILLERS = ("", "honestly", "seriously", "really", "oh", "yay", "ugh", "wow")


def generate(
    n_tweets: int = 2000,
    seed: int = 0,
    templates: tuple[SynthTemplate, ...] = TEMPLATES,
) -> list[LabeledTweet]:
    """Balanced labeled corpus of templated numeric tweets."""
    if n_tweets < 2:
        raise DataError("generate: need at least two tweets")
    rng = np.random.default_rng(seed)
    tweets: list[LabeledTweet] = []
    for i in range(n_tweets):
        label = i % 2
        template = templates[int(rng.integers(len(templates)))]
        mean = template.sarc_mean if label == 1 else template.nonsarc_mean
        value = max(template.minimum, int(round(rng.normal(mean, template.sigma))))
        text = template.text.format(v=value)
        filler = _FILLERS[int(rng.integers(len(_FILLERS)))]
        if filler:
            text = f"{filler} {text}"
        tweets.append(LabeledTweet(id=f"synth-{i:06d}", text=text, label=label, raw_text=text))
    return tweets
