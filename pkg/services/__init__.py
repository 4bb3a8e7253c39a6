from services.scoring_client import ScorerError, embed, token_logprobs, embed_url, lm_url
