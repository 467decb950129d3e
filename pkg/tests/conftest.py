import pytest

import shortnet as sn


@pytest.fixture(scope="session")
def graphs() -> dict[str, sn.NetworkGraph]:
    return {name: sn.build_network(sn.preset(name)) for name in sn.preset_names()}


@pytest.fixture(scope="session")
def reports(graphs) -> dict[str, sn.CostReport]:
    return {name: sn.network_cost(g) for name, g in graphs.items()}
