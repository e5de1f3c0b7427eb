"""Shot-intent classification toolkit.

Classifies cricket batters' shots as high energy (aggressive) or low
energy (defensive) from pose time series, and validates predictions
against ball-by-ball match statistics.
"""

__version__ = "0.1.0"
