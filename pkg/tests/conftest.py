import pytest

from semxai.config import fixture_config_path, load_config
from semxai.forecasting import load_feature_specs
from semxai.kg import KnowledgeGraph, install_hierarchy, load_hierarchy
from semxai.pipeline import run_pipeline


@pytest.fixture
def hierarchy_kg():
    specs = load_feature_specs()
    hierarchy, descriptions = load_hierarchy()
    kg = KnowledgeGraph()
    install_hierarchy(kg, hierarchy, {s.id: s.abstraction_leaf for s in specs}, descriptions,
                      {s.id: s.actionable for s in specs})
    return kg


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    """One full pipeline run over the bundled corpus, shared across tests."""
    out = tmp_path_factory.mktemp("run")
    result = run_pipeline(load_config(fixture_config_path()), out)
    return result, out


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log(request):
    lines = []
    request.config._acceptance_lines = lines
    return lines
