"""Factory for creating sketch samplers."""

from typing import Type

from .exceptions import ConfigError
from .sampling import (
    GaussianSampler,
    PreconditionedSampler,
    SamplerInterface,
    SamplerSpec,
)


class SamplerFactory:
    """Factory class for creating sketch samplers."""

    _samplers: dict[str, Type[SamplerInterface]] = {
        "gaussian": GaussianSampler,
        "preconditioned": PreconditionedSampler,
    }

    @classmethod
    def create(cls, spec: SamplerSpec) -> SamplerInterface:
        """Create a sampler instance.

        Args:
            spec: Sampler kind, seed and optional preconditioner

        Returns:
            SamplerInterface: A sampler bound to the spec

        Raises:
            ConfigError: If the sampler kind is not supported
        """
        sampler_class = cls._samplers.get(spec.kind.lower())
        if not sampler_class:
            raise ConfigError(f"unsupported sampler kind: {spec.kind}", "sampler")

        return sampler_class(spec)

    @classmethod
    def register_sampler(
        cls, kind: str, sampler_class: Type[SamplerInterface]
    ) -> None:
        """Register a new sampler type (e.g. SRHT or Rademacher sketches).

        Args:
            kind: Sampler kind name
            sampler_class: Class implementing SamplerInterface
        """
        cls._samplers[kind.lower()] = sampler_class

    @classmethod
    def get_supported_kinds(cls) -> list[str]:
        """Get list of supported sampler kinds.

        Returns:
            list[str]: List of supported kind names
        """
        return list(cls._samplers.keys())
