import os
import tempfile
from pathlib import Path

# Logger and ConfigManager resolve their home directory at import time
os.environ['TORIC_BAYES_HOME'] = tempfile.mkdtemp(prefix='toricbayes-test-')
os.environ.pop('TORIC_BAYES_BUDGET', None)

import pytest  # noqa: E402
from toricbayes.config import QI_MODEL, SZ_MODEL  # noqa: E402
from toricbayes.services.pipeline import build_model, model_design  # noqa: E402
from toricbayes.services.tables import load_table_file  # noqa: E402

DATA_DIR = Path(__file__).parent / 'data'


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture(scope='session')
def cancer_table():
    return load_table_file(DATA_DIR / 'cancer.json')


@pytest.fixture(scope='session')
def qi_run(cancer_table):
    return build_model(model_design(cancer_table, QI_MODEL), QI_MODEL)


@pytest.fixture(scope='session')
def sz_run(cancer_table):
    return build_model(model_design(cancer_table, SZ_MODEL), SZ_MODEL)
