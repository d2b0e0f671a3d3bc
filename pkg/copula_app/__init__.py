"""Two-component copula toolkit: heavy-tailed loss model, reference copulas and GoF testing."""
