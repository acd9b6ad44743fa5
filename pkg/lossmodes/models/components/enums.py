"""Enums for mode classification."""


from enum import (Enum, Flag, auto)


class ModeClass(Enum):
    """Spectral cluster of an eigenmode once the dichotomy hypothesis holds.

    sigma0: low-loss cluster around the origin.
    sigma1: high-loss cluster around -i*beta*b_j.
    unclassified: the hypothesis does not hold, reported as "n/a".
    """
    sigma0 = "sigma0"
    sigma1 = "sigma1"
    unclassified = "n/a"

    def __str__(self):
        return self.value


class Regime(Enum):
    """Overdamping regime of a system at a given loss parameter."""
    complete = "complete"
    selective = "selective"
    below_threshold = "below-threshold"

    def __str__(self):
        return self.value


class ModeFlags(Flag):
    """Boolean properties of a computed mode."""
    overdamped = auto()
    marginal = auto()
    lossless = auto()

    def __str__(self):
        return "|".join(flag.name for flag in ModeFlags if flag in self) \
            or "none"

    def as_dict(self):
        """Get the flags as a dict.

        Returns
        -------
        dict[str, bool]
        """
        return {"overdamped": bool(self & ModeFlags.overdamped),
                "marginal": bool(self & ModeFlags.marginal),
                "lossless": bool(self & ModeFlags.lossless)}


class QTrend(Enum):
    """Predicted large-loss behaviour of a quality factor.

    growing: Q increases linearly in beta.
    infinite: the mode stays lossless, Q = inf.
    vanishing: Q decreases to zero.
    """
    growing = "growing"
    infinite = "infinite"
    vanishing = "vanishing"

    def __str__(self):
        return self.value
