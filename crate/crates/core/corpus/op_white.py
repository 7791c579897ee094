def heuristics(prize, distance, maxlen):
    n = len(prize)
    heuristics_matrix = np.zeros((n, n))

    for i in range(n):
        prize_distance_ratios = []
        for j in range(n):
            if i != j and distance[i][j] <= maxlen:
                ratio = prize[j] / distance[i][j]
                exponential_ratio = np.exp(prize[j] / distance[i][j])
                combined_score = 0.5 * ratio + 0.5 * exponential_ratio  # Equal weight to both ratios
                prize_distance_ratios.append((j, combined_score))

        # Sort nodes by the combined score in descending order
        prize_distance_ratios.sort(key=lambda x: x[1], reverse=True)
        
        # Calculate cumulative promise while respecting maxlen
        accumulated_distance = 0
        for j, score in prize_distance_ratios:
            if accumulated_distance + distance[i][j] <= maxlen:
                heuristics_matrix[i][j] = score
                accumulated_distance += distance[i][j]

    return heuristics_matrix
