def heuristics(node_attr, node_constraint):
    fill = np.add.outer(node_attr, node_attr)
    heuristics_matrix = np.where(fill <= node_constraint, fill / node_constraint, 0.0)
    np.fill_diagonal(heuristics_matrix, 0.0)
    return heuristics_matrix
