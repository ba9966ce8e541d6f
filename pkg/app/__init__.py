"""Lead-Lag Engine - lead-lag network trading toolkit.

This package detects leader/lagger relations between stocks from daily
returns, ranks the pairs with CAPM and network out-degree scores, and
backtests a threshold/trailing-stop strategy on the selected pairs.
"""

__version__ = "1.0.0"
__author__ = "Lead-Lag Engine Contributors"
