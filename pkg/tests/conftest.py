import pytest

from clubforge.logging_utils import reset_run_id
from clubforge.models import reset_config_cache


@pytest.fixture(autouse=True)
def clean_config_cache():
    reset_config_cache()
    yield
    reset_config_cache()
    reset_run_id()
