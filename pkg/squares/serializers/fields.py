"""
Custom DRF fields for exact and high-precision numbers.

Rationals travel as "p/q" strings (integers as "k") so no value ever passes
through a binary float.
"""
from fractions import Fraction

import mpmath
from rest_framework import serializers

from squares.utils.polytope import format_rational


class RationalField(serializers.Field):
    default_error_messages = {
        'invalid': 'Expected a rational written as "p/q" or an integer, got {value!r}.',
    }

    def to_representation(self, value):
        return format_rational(value)

    def to_internal_value(self, data):
        if isinstance(data, bool) or isinstance(data, float):
            self.fail('invalid', value=data)
        try:
            return Fraction(str(data).strip())
        except (ValueError, ZeroDivisionError):
            self.fail('invalid', value=data)


class MpfField(serializers.Field):
    """mpmath numbers rendered as decimal strings; digits come from the serializer context."""

    def __init__(self, digits=None, **kwargs):
        kwargs.setdefault('read_only', True)
        self.digits = digits
        super().__init__(**kwargs)

    def to_representation(self, value):
        digits = self.digits or self.context.get('digits', 20)
        return mpmath.nstr(mpmath.mpf(value), digits)
