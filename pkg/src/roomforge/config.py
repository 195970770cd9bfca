"""Pipeline configuration with the experiment defaults baked in."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for both pipeline stages.

    Defaults match the reference experiment setup: sampling temperature 0.4,
    novelty threshold 10% of the candidate's tiles, 100 generations and 10
    repair picks per round, 5 fine-tune epochs in stage 1 and 2 in stage 2,
    5 automated rounds, and a stage-1 target of 60 new accepted rooms.
    """

    temperature: float = 0.4
    novelty_fraction: float = 0.10
    gen_per_round: int = 100
    repair_per_round: int = 10
    stage1_epochs: int = 5
    stage2_epochs: int = 2
    stage2_rounds: int = 5
    stage1_target_new: int = 60
    seed: int = 0

    def __post_init__(self) -> None:
        counts = {
            "gen_per_round": self.gen_per_round,
            "repair_per_round": self.repair_per_round,
            "stage1_epochs": self.stage1_epochs,
            "stage2_epochs": self.stage2_epochs,
            "stage2_rounds": self.stage2_rounds,
            "stage1_target_new": self.stage1_target_new,
        }
        for name, value in counts.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0.0 < self.novelty_fraction <= 1.0:
            raise ValueError(f"novelty_fraction must be in (0, 1], got {self.novelty_fraction}")
        if self.temperature < 0.0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    def to_dict(self) -> dict:
        return asdict(self)
