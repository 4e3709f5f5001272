import logging

from rest_framework import serializers

from squares.exceptions import MagicSquaresError
from squares.utils.complexity import PartitionCertificate
from squares.utils.magic_forms import FormSystem

logger = logging.getLogger(__name__)


class FormSystemSerializer(serializers.Serializer):
    """
    Serializer for FormSystem.

    Reading back with FormSystemSerializer(data=...).to_system() rebuilds a
    system with the same content hash.
    """
    n = serializers.IntegerField(allow_null=True, required=False, default=None)
    d = serializers.IntegerField(read_only=True)
    t = serializers.IntegerField(read_only=True)
    skeleton = serializers.ListField(child=serializers.IntegerField(min_value=1), required=False, default=list)
    unit_point = serializers.ListField(child=serializers.IntegerField(), allow_null=True, required=False, default=None)
    coefficients = serializers.ListField(
        source='rows',
        child=serializers.ListField(child=serializers.IntegerField()),
        allow_empty=False,
    )
    trivial_cells = serializers.ListField(child=serializers.IntegerField(), read_only=True)
    content_hash = serializers.SerializerMethodField()

    def get_content_hash(self, obj):
        return obj.content_hash()

    def validate_coefficients(self, value):
        widths = {len(row) for row in value}
        if len(widths) != 1:
            raise serializers.ValidationError(f"coefficient rows have differing lengths {sorted(widths)}")
        return value

    def validate(self, attrs):
        width = len(attrs['rows'][0])
        if attrs.get('unit_point') is not None and len(attrs['unit_point']) != width:
            raise serializers.ValidationError({'unit_point': f"expected {width} coordinates"})
        return attrs

    def to_system(self) -> FormSystem:
        """Build the FormSystem from validated data."""
        self.is_valid(raise_exception=True)
        data = self.validated_data
        try:
            return FormSystem.from_matrix(data['rows'], data.get('skeleton') or (), data.get('unit_point'), data.get('n'))
        except MagicSquaresError as e:
            logger.error(f"Serialized form system is inconsistent: {str(e)}")
            raise serializers.ValidationError(str(e))


class PartitionCertificateSerializer(serializers.Serializer):
    form_index = serializers.IntegerField(min_value=0)
    blocks = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField(min_value=0)))
    s = serializers.IntegerField(read_only=True)

    def to_certificate(self) -> PartitionCertificate:
        self.is_valid(raise_exception=True)
        data = self.validated_data
        return PartitionCertificate(form_index=data['form_index'], blocks=tuple(tuple(b) for b in data['blocks']))


class ComplexityReportSerializer(serializers.Serializer):
    """Serializer for ComplexityReport, certificates included for audit."""
    s = serializers.IntegerField(allow_null=True)
    is_infinite = serializers.BooleanField(read_only=True)
    mode = serializers.CharField()
    lower_bound_witness = serializers.IntegerField(allow_null=True)
    certificates = PartitionCertificateSerializer(many=True)
