def heuristics_v2(distance_matrix):
    num_nodes = distance_matrix.shape[0]
    heuristics_matrix = np.zeros_like(distance_matrix)

    for i in range(num_nodes):
        for j in range(num_nodes):
            if i != j:
                # Calculate the heuristic value for each edge (i, j)
                heuristics_matrix[i][j] = (distance_matrix[i][j] / (np.sum(distance_matrix[i]) + np.sum(distance_matrix[j])))

    return heuristics_matrix
