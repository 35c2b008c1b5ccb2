"""
Unit tests for the exception hierarchy.
"""

import pytest

from arnold_waveguide.errors import (
    ArnoldWaveguideError,
    ClassificationError,
    CollisionResolutionError,
    ConfigFileNotFoundError,
    ConfigInvariantError,
    ConfigSchemaError,
    ContractViolationError,
    DomainError,
    FitError,
    GroupingError,
    IntegrationFailureError,
    NoSolutionError,
    ResolutionError,
    ResonanceNotFoundError,
    TruncationOverflowError,
    UnitarityError,
)


class TestExitCodes:
    @pytest.mark.parametrize("error_type", [ConfigFileNotFoundError, ConfigSchemaError, ConfigInvariantError])
    def test_config_errors(self, error_type):
        assert error_type("x").exit_code == 2

    @pytest.mark.parametrize("error_type", [ContractViolationError, IntegrationFailureError, ResolutionError, UnitarityError, FitError, CollisionResolutionError])
    def test_numerical_errors(self, error_type):
        assert error_type("x").exit_code == 3

    @pytest.mark.parametrize("error_type", [DomainError, ResonanceNotFoundError, NoSolutionError, GroupingError, ClassificationError, TruncationOverflowError])
    def test_physics_errors(self, error_type):
        assert error_type("x").exit_code == 4

    def test_base_is_internal(self):
        assert ArnoldWaveguideError("x").exit_code == 1


class TestErrorDetails:
    def test_config_error_carries_key(self):
        error = ConfigInvariantError("k must be nonzero", key="model.k")
        assert error.key == "model.k"
        assert isinstance(error, ValueError)

    def test_grouping_diagnostics_default_to_empty(self):
        assert GroupingError("ambiguous").diagnostics == {}

    def test_numerical_errors_are_arithmetic(self):
        with pytest.raises(ArithmeticError):
            raise UnitarityError("off the unit circle")
