def heuristics_v2(distance_matrix):
    num_nodes = distance_matrix.shape[0]
    heuristics_matrix = np.zeros((num_nodes, num_nodes))

    for i in range(num_nodes):
        for j in range(num_nodes):
            if i != j:
                # Modified connection score with increased penalty for high-degree nodes
                degree_penalty = np.sum(distance_matrix[j] < distance_matrix[i]) + 2  # Higher penalty
                distance_score = 1 / (distance_matrix[i][j] ** 3)  # Modified distance scoring
                heuristics_matrix[i][j] = distance_score / degree_penalty

    # Normalize the heuristics matrix
    heuristic_sum = np.sum(heuristics_matrix, axis=1, keepdims=True)
    heuristics_matrix = heuristics_matrix / heuristic_sum

    return heuristics_matrix
