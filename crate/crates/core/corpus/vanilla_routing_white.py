def heuristics(distance_matrix):
    n = distance_matrix.shape[0]
    heuristics_matrix = 1.0 / (distance_matrix + np.eye(n))
    np.fill_diagonal(heuristics_matrix, 0.0)
    return heuristics_matrix
