# Import Libraries
import os
from pydantic import BaseModel, Field

from synth_files.synth_states import SynthesisBudget, ValidationBounds

# Load environment variables

# Only load .env for local development
if os.getenv("RENDER") is None:
    from dotenv import load_dotenv

    load_dotenv()


def env_flag(name: str, default: bool = False) -> bool:
    """Read a boolean flag from the environment.

    Args:
        name (str): Environment variable name.
        default (bool): Value used when the variable is unset.

    Returns:
        bool: True for "true", "1", "yes" or "y" (any case).
    """
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.lower() in ("true", "1", "yes", "y")


class Settings(BaseModel):
    """Run-wide defaults, overridable by CLI flags.

    Attributes:
        tol (float): Relative tolerance for real comparisons.
        dsl_size_max (int): Max DSL size per hole body.
        max_candidates (int): Max joint candidates per synthesize call.
        max_refutations (int): Refutation cap of incremental synthesis.
        bank_size (int): Exhaustive bank level for goal-directed search.
        seed (int): Random seed.
        validation_rounds (int): Max validate-and-fix rounds.
        validation_strings (int): K strings per alternate completion.
        validation_contexts (int): C contexts per sampled string.
        max_alternates (int): Alternate bodies tried per hole when validating.
        validation_pairs (bool): Also rebind pairs of holes when validating.
        max_depth (int): Depth budget of the example generator.
        log_level (str): Root logger level.
        debug (bool): Assert the incremental loop invariant every iteration.
    """

    tol: float = Field(1e-6, ge=0)
    dsl_size_max: int = Field(16, gt=0)
    max_candidates: int = Field(1_000_000, gt=0)
    max_refutations: int = Field(16, gt=0)
    bank_size: int = Field(5, gt=0)
    seed: int = Field(0, ge=0)
    validation_rounds: int = Field(4, ge=0)
    validation_strings: int = Field(24, ge=0)
    validation_contexts: int = Field(3, gt=0)
    max_alternates: int = Field(3, ge=0)
    validation_pairs: bool = True
    max_depth: int = Field(12, gt=0)
    log_level: str = Field("WARNING", min_length=1)
    debug: bool = False

    def budget(self) -> SynthesisBudget:
        return SynthesisBudget(
            max_size=self.dsl_size_max,
            max_candidates=self.max_candidates,
            max_refutations=self.max_refutations,
            seed=self.seed,
            bank_size=self.bank_size,
        )

    def bounds(self) -> ValidationBounds:
        return ValidationBounds(
            strings=self.validation_strings,
            contexts=self.validation_contexts,
            max_alternates=self.max_alternates,
            hole_pairs=self.validation_pairs,
            max_depth=self.max_depth,
        )


def load_settings() -> Settings:
    """Build Settings from AGSYNTH_* environment variables.

    Returns:
        Settings: Validated settings; unset variables keep their defaults.

    Raises:
        pydantic.ValidationError: If a variable holds an invalid value.
    """
    names = {
        "tol": "AGSYNTH_TOL",
        "dsl_size_max": "AGSYNTH_DSL_SIZE_MAX",
        "max_candidates": "AGSYNTH_MAX_CANDIDATES",
        "max_refutations": "AGSYNTH_MAX_REFUTATIONS",
        "bank_size": "AGSYNTH_BANK_SIZE",
        "seed": "AGSYNTH_SEED",
        "validation_rounds": "AGSYNTH_VALIDATION_ROUNDS",
        "validation_strings": "AGSYNTH_VALIDATION_STRINGS",
        "validation_contexts": "AGSYNTH_VALIDATION_CONTEXTS",
        "max_alternates": "AGSYNTH_MAX_ALTERNATES",
        "max_depth": "AGSYNTH_MAX_DEPTH",
        "log_level": "AGSYNTH_LOG_LEVEL",
    }
    values = {field: os.getenv(var) for field, var in names.items()}
    values = {k: v for k, v in values.items() if v is not None}
    values["debug"] = env_flag("AGSYNTH_DEBUG")
    values["validation_pairs"] = env_flag("AGSYNTH_VALIDATION_PAIRS", True)
    return Settings(**values)
