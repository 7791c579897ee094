def heuristics(edge_attr, node_attr):
    n = edge_attr.shape[0]
    heuristics_matrix = 1.0 / (edge_attr + np.eye(n))
    np.fill_diagonal(heuristics_matrix, 0.0)
    return heuristics_matrix
