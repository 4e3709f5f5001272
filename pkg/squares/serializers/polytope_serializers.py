from rest_framework import serializers

from squares.exceptions import MagicSquaresError
from squares.serializers.fields import RationalField
from squares.utils.ehrhart import DIRECT, RECIPROCITY, Quasipolynomial, volume


class VertexSetSerializer(serializers.Serializer):
    count = serializers.SerializerMethodField()
    denominator_lcm = serializers.IntegerField()
    vertices = serializers.SerializerMethodField()

    def get_count(self, obj):
        return len(obj)

    def get_vertices(self, obj):
        return [vertex.to_strings() for vertex in obj.vertices]


class CountEntrySerializer(serializers.Serializer):
    N = serializers.IntegerField()
    count = serializers.IntegerField()
    provenance = serializers.ChoiceField(choices=[DIRECT, RECIPROCITY])


class CountTableSerializer(serializers.Serializer):
    n = serializers.IntegerField(allow_null=True)
    entries = serializers.SerializerMethodField()

    def get_entries(self, obj):
        return CountEntrySerializer(obj.sorted_entries(), many=True).data


class QuasipolynomialSerializer(serializers.Serializer):
    """Quasipolynomial with constant-first "p/q" coefficients per residue class."""
    degree = serializers.IntegerField(min_value=0)
    period = serializers.IntegerField(min_value=1)
    coefficients = serializers.ListField(child=serializers.ListField(child=RationalField()))
    volume = serializers.SerializerMethodField()

    def get_volume(self, obj):
        try:
            return RationalField().to_representation(volume(obj))
        except MagicSquaresError:
            return None

    def to_quasipolynomial(self) -> Quasipolynomial:
        self.is_valid(raise_exception=True)
        data = self.validated_data
        try:
            return Quasipolynomial(
                degree=data['degree'],
                period=data['period'],
                coefficients=tuple(tuple(branch) for branch in data['coefficients']),
            )
        except MagicSquaresError as e:
            raise serializers.ValidationError(str(e))
