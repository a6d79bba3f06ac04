"""
Parameter Validators for the multiplicative chaos lab
Checks experiment parameters against the preconditions of the numerical modules before any compute
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple
import logging

from settings import max_table_limit

logger = logging.getLogger(__name__)

# Below this many trials MC verdicts are noisy
RECOMMENDED_TRIALS = 100
# Largest y for which per-prime work stays interactive
RECOMMENDED_MAX_Y = 1e7
TWISTS = ("one", "moebius", "moebius2")
MODELS = ("steinhaus", "gaussian")


class ParameterValidator:
    """Validates experiment parameters"""

    def __init__(self, strict_mode: bool = False):
        """
        Initialize validator

        Args:
            strict_mode: If True, soft issues (small trial counts, very large y)
                        count as errors
                        If False, they are warnings only
        """
        self.strict_mode = strict_mode
        self.validation_errors = []
        self.validation_warnings = []

    def _soft(self, message: str) -> bool:
        """Record a soft issue; returns whether the value is still acceptable"""
        if self.strict_mode:
            self.validation_errors.append(message)
            return False
        self.validation_warnings.append(message)
        return True

    def validate_number(self, value, field_name: str, minimum: Optional[float] = None,
                        maximum: Optional[float] = None, strict_minimum: bool = False) -> Tuple[bool, Optional[float], Optional[str]]:
        """
        Validate a finite real number inside optional bounds

        Returns:
            Tuple of (is_valid, cleaned_value, error_message)
        """
        try:
            cleaned = float(value)
        except (TypeError, ValueError):
            error = f"{field_name} must be a number, got {value!r}"
            self.validation_errors.append(error)
            return False, None, error

        if not math.isfinite(cleaned):
            error = f"{field_name} must be finite"
            self.validation_errors.append(error)
            return False, cleaned, error

        if minimum is not None and (cleaned <= minimum if strict_minimum else cleaned < minimum):
            relation = ">" if strict_minimum else ">="
            error = f"{field_name} must be {relation} {minimum:g}, got {cleaned:g}"
            self.validation_errors.append(error)
            return False, cleaned, error

        if maximum is not None and cleaned > maximum:
            error = f"{field_name} must be <= {maximum:g}, got {cleaned:g}"
            self.validation_errors.append(error)
            return False, cleaned, error

        return True, cleaned, None

    def validate_scale(self, value, field_name: str = "x") -> Tuple[bool, Optional[float], Optional[str]]:
        """Validate a summation length x: at least 3 and within the factor-table limit"""
        return self.validate_number(value, field_name, minimum=3, maximum=max_table_limit())

    def validate_grid(self, values: Sequence, field_name: str, minimum: float = 3,
                      maximum: Optional[float] = None) -> Tuple[bool, List[float], Optional[str]]:
        """
        Validate a grid of values (x-grid, y-grid)

        The cleaned grid is sorted ascending with duplicates removed.
        """
        if not values:
            error = f"{field_name} must not be empty"
            self.validation_errors.append(error)
            return False, [], error

        cleaned = []
        for value in values:
            is_valid, number, error = self.validate_number(value, field_name, minimum, maximum)
            if not is_valid:
                return False, list(values), error
            cleaned.append(number)

        cleaned = sorted(set(cleaned))
        if len(cleaned) < len(values):
            warning = f"{field_name} had duplicate entries"
            self.validation_warnings.append(warning)
            return True, cleaned, warning
        return True, cleaned, None

    def validate_truncation(self, eps, delta) -> Tuple[bool, Tuple[float, float], Optional[str]]:
        """Validate (eps, delta): 0 < eps < 1, delta > 0"""
        ok_eps, eps, error = self.validate_number(eps, "eps", minimum=0, maximum=1, strict_minimum=True)
        if not ok_eps:
            return False, (eps, delta), error
        if eps >= 1:
            error = "eps must be < 1"
            self.validation_errors.append(error)
            return False, (eps, delta), error
        ok_delta, delta, error = self.validate_number(delta, "delta", minimum=0, strict_minimum=True)
        if not ok_delta:
            return False, (eps, delta), error
        if delta > 1 - eps:
            warning = f"delta={delta:g} exceeds 1 - eps; a single block covers (x^eps, x]"
            self.validation_warnings.append(warning)
            return True, (eps, delta), warning
        return True, (eps, delta), None

    def validate_moment(self, value) -> Tuple[bool, Optional[float], Optional[str]]:
        """Validate a moment exponent q in (0, 1]"""
        return self.validate_number(value, "q", minimum=0, maximum=1, strict_minimum=True)

    def validate_shifts(self, values: Sequence, field_name: str = "u") -> Tuple[bool, List[float], Optional[str]]:
        """Validate shift parameters u >= 0"""
        if not values:
            error = f"{field_name} must not be empty"
            self.validation_errors.append(error)
            return False, [], error
        cleaned = []
        for value in values:
            is_valid, number, error = self.validate_number(value, field_name, minimum=0)
            if not is_valid:
                return False, list(values), error
            cleaned.append(number)
        return True, cleaned, None

    def validate_interval(self, value: Sequence) -> Tuple[bool, List[float], Optional[str]]:
        """Validate an interval [lo, hi] with lo < hi"""
        if value is None or len(value) != 2:
            error = f"interval must have two endpoints, got {value!r}"
            self.validation_errors.append(error)
            return False, value, error
        lo, hi = float(value[0]), float(value[1])
        if not lo < hi:
            error = f"interval needs lo < hi, got [{lo:g}, {hi:g}]"
            self.validation_errors.append(error)
            return False, [lo, hi], error
        return True, [lo, hi], None

    def validate_trials(self, value) -> Tuple[bool, Optional[int], Optional[str]]:
        """Validate a trial count; fewer than RECOMMENDED_TRIALS is a soft issue"""
        is_valid, number, error = self.validate_number(value, "trials", minimum=1)
        if not is_valid:
            return False, None, error
        cleaned = int(number)
        if cleaned != number:
            error = f"trials must be an integer, got {value!r}"
            self.validation_errors.append(error)
            return False, cleaned, error
        if cleaned < RECOMMENDED_TRIALS:
            warning = f"trials={cleaned} is below {RECOMMENDED_TRIALS}; standard errors will be large"
            return self._soft(warning), cleaned, warning
        return True, cleaned, None

    def validate_smoothness(self, value, field_name: str = "y") -> Tuple[bool, Optional[float], Optional[str]]:
        """Validate a prime cutoff y >= 3; very large y is a soft issue"""
        is_valid, number, error = self.validate_number(value, field_name, minimum=3)
        if not is_valid:
            return False, number, error
        if number > RECOMMENDED_MAX_Y:
            warning = f"{field_name}={number:g} is above {RECOMMENDED_MAX_Y:g}; expect long runtimes"
            return self._soft(warning), number, warning
        return True, number, None

    def validate_phi(self, breakpoints: Sequence, values: Sequence) -> Tuple[bool, Dict, Optional[str]]:
        """Validate a step function: positive increasing breakpoints, one value each"""
        data = {'breakpoints': list(breakpoints or []), 'values': list(values or [])}
        if not data['breakpoints'] or len(data['breakpoints']) != len(data['values']):
            error = "phi needs matching non-empty breakpoint and value lists"
            self.validation_errors.append(error)
            return False, data, error
        b = [float(v) for v in data['breakpoints']]
        if b[0] <= 0 or any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            error = f"phi breakpoints must be positive and strictly increasing: {b}"
            self.validation_errors.append(error)
            return False, data, error
        data['breakpoints'] = b
        return True, data, None

    def validate_choice(self, value: str, field_name: str, choices: Sequence[str]) -> Tuple[bool, str, Optional[str]]:
        cleaned = str(value).strip().lower()
        if cleaned not in choices:
            error = f"{field_name} must be one of {', '.join(choices)}, got {value!r}"
            self.validation_errors.append(error)
            return False, cleaned, error
        return True, cleaned, None

    def validate_all_fields(self, data: Dict) -> Dict:
        """
        Validate all fields in the data dictionary

        Args:
            data: Dictionary of parameter names to values

        Returns:
            Dictionary with validation results and cleaned data
        """
        self.validation_errors = []
        self.validation_warnings = []
        validated_data = dict(data)
        field_errors = {}
        field_warnings = {}

        def record(field_name: str, is_valid: bool, cleaned, message: Optional[str]):
            validated_data[field_name] = cleaned
            if message:
                if not is_valid:
                    field_errors[field_name] = message
                else:
                    field_warnings[field_name] = message

        for field_name, value in data.items():
            if value is None:
                continue

            # Scales
            if field_name == 'x':
                record(field_name, *self.validate_scale(value))

            elif field_name == 'xs':
                record(field_name, *self.validate_grid(value, field_name, 3, max_table_limit()))

            # Prime cutoffs
            elif field_name == 'y':
                record(field_name, *self.validate_smoothness(value))

            elif field_name == 'ys':
                is_valid, cleaned, message = self.validate_grid(value, field_name, 3)
                if is_valid and cleaned and cleaned[-1] > RECOMMENDED_MAX_Y:
                    message = f"ys reaches {cleaned[-1]:g}, above {RECOMMENDED_MAX_Y:g}"
                    is_valid = self._soft(message)
                record(field_name, is_valid, cleaned, message)

            # Truncation parameters are checked together
            elif field_name == 'eps':
                is_valid, cleaned, message = self.validate_truncation(value, data.get('delta', 0.05))
                record('eps', is_valid, cleaned[0], message)
                validated_data['delta'] = cleaned[1]

            elif field_name in ('u', 'u_pair'):
                is_valid, cleaned, message = self.validate_shifts(value, field_name)
                if is_valid and field_name == 'u_pair' and len(cleaned) != 2:
                    message = f"u_pair needs two entries, got {len(cleaned)}"
                    self.validation_errors.append(message)
                    is_valid = False
                record(field_name, is_valid, cleaned, message)

            elif field_name == 'q':
                record(field_name, *self.validate_moment(value))

            elif field_name == 'r':
                is_valid, cleaned, message = self.validate_shifts(value, field_name)
                record(field_name, is_valid, cleaned, message)

            elif field_name in ('L', 't_max', 'spacing'):
                record(field_name, *self.validate_number(value, field_name, minimum=0, strict_minimum=True))

            elif field_name == 'interval':
                record(field_name, *self.validate_interval(value))

            elif field_name == 'trials':
                record(field_name, *self.validate_trials(value))

            elif field_name == 'seed':
                record(field_name, *self.validate_number(value, field_name, minimum=0))
                if field_name not in field_errors:
                    validated_data[field_name] = int(validated_data[field_name])

            elif field_name == 'phi_breakpoints':
                is_valid, cleaned, message = self.validate_phi(value, data.get('phi_values'))
                record(field_name, is_valid, cleaned['breakpoints'], message)

            elif field_name == 'twist':
                record(field_name, *self.validate_choice(value, field_name, TWISTS))

            elif field_name == 'model':
                record(field_name, *self.validate_choice(value, field_name, MODELS))

            # Default - no specific validation
            else:
                validated_data[field_name] = value

        return {
            'success': len(field_errors) == 0,
            'data': validated_data,
            'errors': field_errors,
            'warnings': field_warnings,
            'total_errors': len(field_errors),
            'total_warnings': len(field_warnings)
        }
