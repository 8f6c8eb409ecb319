# domain package - Domain models for the covering-numbers toolkit
