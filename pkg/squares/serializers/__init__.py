from .fields import RationalField, MpfField
from .system_serializers import FormSystemSerializer, PartitionCertificateSerializer, ComplexityReportSerializer
from .polytope_serializers import VertexSetSerializer, CountEntrySerializer, CountTableSerializer, QuasipolynomialSerializer
from .local_factor_serializers import RankSpectrumSerializer, StableLocalPolynomialSerializer, LocalFactorSerializer
from .series_serializers import SingularSeriesResultSerializer, CensusResultSerializer

__all__ = [
    # Fields
    'RationalField',
    'MpfField',

    # Form systems and complexity
    'FormSystemSerializer',
    'PartitionCertificateSerializer',
    'ComplexityReportSerializer',

    # Polytopes and counts
    'VertexSetSerializer',
    'CountEntrySerializer',
    'CountTableSerializer',
    'QuasipolynomialSerializer',

    # Local factors
    'RankSpectrumSerializer',
    'StableLocalPolynomialSerializer',
    'LocalFactorSerializer',

    # Singular series and census
    'SingularSeriesResultSerializer',
    'CensusResultSerializer',
]
