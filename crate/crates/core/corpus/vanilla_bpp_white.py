def heuristics(demand, capacity):
    fill = np.add.outer(demand, demand)
    heuristics_matrix = np.where(fill <= capacity, fill / capacity, 0.0)
    np.fill_diagonal(heuristics_matrix, 0.0)
    return heuristics_matrix
