def heuristics(edge_attr):
    return 1.0 / edge_attr.flatten()
