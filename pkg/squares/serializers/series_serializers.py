from rest_framework import serializers

from squares.serializers.fields import MpfField, RationalField


class SingularSeriesResultSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    volume = RationalField()
    exceptional_prefactor = RationalField()
    p0 = serializers.IntegerField()
    P_max = serializers.IntegerField()
    precision = serializers.IntegerField()
    truncated_product = MpfField()
    tail_relative = MpfField(digits=3)
    tail_error_estimate = MpfField(digits=3)
    value = MpfField()


class CensusResultSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    N = serializers.IntegerField()
    total_count = serializers.IntegerField()
    distinct_entries_count = serializers.IntegerField()
    distinct_fraction = RationalField(read_only=True)
    predicted = MpfField(digits=10)
    ratio = MpfField(digits=6)
