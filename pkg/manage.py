import uvicorn

from noetherq.conf import conf

if __name__ == "__main__":
    uvicorn.run("noetherq.api:app", host=conf.API_HOST, port=conf.API_PORT, reload=conf.DEBUG)
