import mpmath
from rest_framework import serializers

from squares.serializers.fields import RationalField


class RankSpectrumSerializer(serializers.Serializer):
    t = serializers.IntegerField()
    d = serializers.IntegerField()
    modulus = serializers.IntegerField(allow_null=True)
    max_pivot = serializers.IntegerField(allow_null=True)
    counts = serializers.SerializerMethodField()

    def get_counts(self, obj):
        # JSON object keys are strings
        return {str(size): {str(rank): count for rank, count in obj.at(size).items()} for size in sorted(obj.counts)}


class StableLocalPolynomialSerializer(serializers.Serializer):
    coefficients = serializers.ListField(child=serializers.IntegerField())
    p0 = serializers.IntegerField()
    degree = serializers.IntegerField(read_only=True)
    text = serializers.SerializerMethodField()

    def get_text(self, obj):
        return str(obj)


class LocalFactorSerializer(serializers.Serializer):
    p = serializers.IntegerField()
    nonvanishing_count = serializers.IntegerField()
    beta = RationalField()
    beta_decimal = serializers.SerializerMethodField()

    def get_beta_decimal(self, obj):
        return mpmath.nstr(mpmath.mpf(obj.beta.numerator) / obj.beta.denominator, self.context.get('digits', 15))
