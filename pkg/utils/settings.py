from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Settings:
    """
    Tolerances and defaults shared by the library and the CLI.

    Values change only through command line flags (no environment or config
    files); the effective settings are echoed into each certificate.
    """
    rel_tol: float = 1e-12
    holder_tol: float = 1e-9
    default_policy: str = "mid"
    c_policy: str = "lo"
    c0_epsilon_factor: float = 0.49
    c0_cone_delta: float = 0.5
    cone_resolution: int = 4
    cone_max_refinements: int = 5
    partition_epsilon: float = 0.1
    modulus_max_knots: int = 1_000_000
    counterexample_K: float = 11.0
    counterexample_n1: int = 1
    counterexample_N: int = 5
    float_digits: int = 17

    def as_dict(self):
        return asdict(self)


DEFAULT_SETTINGS = Settings()

POLICIES = ("lo", "hi", "mid")

TOOL_VERSION = "0.1.0"
