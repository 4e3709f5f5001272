from pathlib import Path

FIXTURES = Path(__file__).resolve().parent / 'fixtures'

# Counts go to memory during tests, never to MAGIC_CACHE_DIR
TEST_CACHES = {
    'default': {'BACKEND': 'django.core.cache.backends.locmem.LocMemCache', 'LOCATION': 'squares-tests'},
    'counts': {'BACKEND': 'django.core.cache.backends.locmem.LocMemCache', 'LOCATION': 'squares-tests-counts'},
}

E3_VALUES = [1, 2, 7, 12, 25, 38, 63, 88]

E4_VALUES = [
    1, 34, 621, 5400, 30277, 125794, 423097, 1214992, 3089369, 7130034, 15210869, 30399592, 57508653,
    103807042, 179946753, 301109616, 488451089, 770830866, 1186938765, 1787779544, 2639668773, 3827663858,
    5459641001, 7670885920, 10629486297, 14542317074, 19662006197,
]


def read_fixture(name):
    return (FIXTURES / name).read_text()
